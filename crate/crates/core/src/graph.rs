//! Undirected simple graphs in compressed sparse row form, node data
//! (features, labels, splits) and their text formats.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{RawrError, Result};
use crate::linalg::DenseMatrix;

/// Immutable undirected simple graph.
///
/// Neighbor lists are sorted, duplicate free and symmetric; there are no
/// self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Builds a graph on `num_nodes` nodes from an undirected edge list.
    ///
    /// Reversed and repeated mentions of an edge collapse to one edge.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if num_nodes == 0 {
            return Err(RawrError::EmptyGraph);
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for (i, &(u, v)) in edges.iter().enumerate() {
            for node in [u, v] {
                if node >= num_nodes {
                    return Err(RawrError::NodeOutOfRange { node, num_nodes });
                }
            }
            if u == v {
                return Err(RawrError::SelfLoop { node: u, line: i + 1 });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for mut list in adj {
            list.sort_unstable();
            list.dedup();
            neighbors.extend(list);
            offsets.push(neighbors.len());
        }
        Ok(Graph { offsets, neighbors })
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes()).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    /// Canonical edge list with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for u in 0..self.num_nodes() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Dense 0/1 adjacency matrix.
    pub fn dense_adjacency(&self) -> DenseMatrix {
        let n = self.num_nodes();
        let mut a = DenseMatrix::zeros(n, n);
        for u in 0..n {
            for &v in self.neighbors(u) {
                a[(u, v)] = 1.0;
            }
        }
        a
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let degrees: Vec<usize> = (0..self.num_nodes()).map(|u| self.degree(u)).collect();
        let mut sorted_degrees = degrees.clone();
        sorted_degrees.sort_unstable();
        DegreeStats { degrees, sorted_degrees }
    }

    /// Breadth-first distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        bfs(self.num_nodes(), source, |u| self.neighbors(u).iter().copied())
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(Option::is_some)
    }

    /// Nodes at shortest-path distance exactly two from `u`, ascending.
    pub fn two_hop_neighbors(&self, u: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for &v in self.neighbors(u) {
            for &w in self.neighbors(v) {
                if w != u && !self.has_edge(u, w) {
                    out.insert(w);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Eccentricity of every node; `None` when the graph is disconnected.
    pub fn eccentricities(&self) -> Option<Vec<usize>> {
        (0..self.num_nodes())
            .map(|u| {
                self.bfs_distances(u)
                    .into_iter()
                    .try_fold(0usize, |m, d| d.map(|d| m.max(d)))
            })
            .collect()
    }
}

pub(crate) fn bfs<I, F>(n: usize, source: usize, neighbors: F) -> Vec<Option<usize>>
where
    F: Fn(usize) -> I,
    I: Iterator<Item = usize>,
{
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for v in neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Degree sequence of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeStats {
    pub degrees: Vec<usize>,
    pub sorted_degrees: Vec<usize>,
}

/// Percentiles of the degree sequence used as the tolerance grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Percentile {
    P0,
    P25,
    P50,
    P75,
    P100,
}

impl Percentile {
    pub const GRID: [Percentile; 5] =
        [Percentile::P0, Percentile::P25, Percentile::P50, Percentile::P75, Percentile::P100];

    pub fn value(self) -> u32 {
        match self {
            Percentile::P0 => 0,
            Percentile::P25 => 25,
            Percentile::P50 => 50,
            Percentile::P75 => 75,
            Percentile::P100 => 100,
        }
    }

    pub fn from_value(p: u32) -> Option<Self> {
        Self::GRID.into_iter().find(|q| q.value() == p)
    }
}

/// Tolerance from the degree sequence.
///
/// `P0` is pinned to 0 (the exact partition), `P100` is the maximum degree
/// and everything else is the nearest-rank percentile
/// `sorted[ceil(p/100 * n) - 1]`.
pub fn degree_percentile(graph: &Graph, p: Percentile) -> f64 {
    let stats = graph.degree_stats();
    let n = stats.sorted_degrees.len();
    match p {
        Percentile::P0 => 0.0,
        Percentile::P100 => stats.sorted_degrees[n - 1] as f64,
        _ => {
            // integer ceil(p * n / 100)
            let rank = (p.value() as usize * n).div_ceil(100);
            stats.sorted_degrees[rank.max(1) - 1] as f64
        }
    }
}

/// Parses a whitespace separated edge list. Lines starting with `#` and
/// blank lines are skipped; the graph spans nodes `0..=max_id`, or more if
/// a `# nodes N` comment says so.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    let mut duplicates = 0usize;
    let mut max_id: Option<usize> = None;
    let mut declared = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("nodes") {
                declared = words.next().and_then(|w| w.parse().ok()).unwrap_or(0);
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next_id = || -> Result<usize> {
            let tok = tokens.next().ok_or_else(|| RawrError::Parse {
                line: lineno,
                msg: "expected two node ids".into(),
            })?;
            tok.parse::<usize>().map_err(|_| RawrError::Parse {
                line: lineno,
                msg: format!("invalid node id {tok:?}"),
            })
        };
        let u = next_id()?;
        let v = next_id()?;
        if tokens.next().is_some() {
            return Err(RawrError::Parse { line: lineno, msg: "trailing tokens".into() });
        }
        if u == v {
            return Err(RawrError::SelfLoop { node: u, line: lineno });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            duplicates += 1;
        }
        max_id = Some(max_id.map_or(u.max(v), |m: usize| m.max(u).max(v)));
        edges.push((u, v));
    }
    let n = max_id.map_or(0, |m| m + 1).max(declared);
    if n == 0 {
        return Err(RawrError::EmptyGraph);
    }
    if duplicates > 0 {
        log::warn!("collapsed {duplicates} repeated edge mention(s)");
    }
    Graph::from_edges(n, &edges)
}

/// Canonical edge list text (`u v` per line, `u < v`, sorted).
pub fn write_edge_list(graph: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes {} edges {}", graph.num_nodes(), graph.num_edges());
    for (u, v) in graph.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// Training split of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
    None,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            "test" => Some(Split::Test),
            "none" => Some(Split::None),
            _ => None,
        }
    }
}

/// Per-node attributes that accompany a [`Graph`].
///
/// Masks are stored as a single split per node, which keeps them disjoint by
/// construction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeData {
    pub features: Option<DenseMatrix>,
    /// Class id per node; `None` means unlabeled.
    pub labels: Option<Vec<Option<usize>>>,
    pub splits: Option<Vec<Split>>,
}

impl NodeData {
    /// Checks the invariants against a graph with `num_nodes` nodes.
    pub fn validate(&self, num_nodes: usize) -> Result<()> {
        if let Some(x) = &self.features {
            if x.rows() != num_nodes {
                return Err(RawrError::DimensionMismatch(format!(
                    "{} feature rows for {num_nodes} nodes",
                    x.rows()
                )));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != num_nodes {
                return Err(RawrError::DimensionMismatch(format!(
                    "{} labels for {num_nodes} nodes",
                    labels.len()
                )));
            }
        }
        if let Some(splits) = &self.splits {
            if splits.len() != num_nodes {
                return Err(RawrError::DimensionMismatch(format!(
                    "{} splits for {num_nodes} nodes",
                    splits.len()
                )));
            }
            for (u, s) in splits.iter().enumerate() {
                let labeled = self.labels.as_ref().is_some_and(|l| l[u].is_some());
                if *s != Split::None && !labeled {
                    return Err(RawrError::InvalidInput(format!(
                        "node {u} is in the {} split but has no label",
                        s.as_str()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of classes (`max label + 1`), or 0 without labels.
    pub fn num_classes(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().flatten().max().map(|m| m + 1))
            .unwrap_or(0)
    }

    pub fn mask(&self, split: Split) -> Vec<bool> {
        match &self.splits {
            Some(s) => s.iter().map(|&x| x == split).collect(),
            None => Vec::new(),
        }
    }

    /// One-hot label matrix restricted to `mask` (zero rows elsewhere).
    pub fn one_hot(&self, mask: &[bool], num_classes: usize) -> DenseMatrix {
        let n = mask.len();
        let mut y = DenseMatrix::zeros(n, num_classes);
        if let Some(labels) = &self.labels {
            for u in 0..n {
                if let (true, Some(c)) = (mask[u], labels[u]) {
                    y[(u, c)] = 1.0;
                }
            }
        }
        y
    }
}

fn split_csv_line(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

/// Parses a feature CSV with header `node,f0,f1,...`; every node needs a row.
pub fn load_features<R: BufRead>(reader: R, num_nodes: usize) -> Result<DenseMatrix> {
    let mut lines = reader.lines().enumerate();
    let dims = loop {
        let Some((idx, line)) = lines.next() else {
            return Err(RawrError::Parse { line: 0, msg: "missing header".into() });
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let header = split_csv_line(&line);
        if header.first() != Some(&"node") {
            return Err(RawrError::Parse { line: idx + 1, msg: "header must start with 'node'".into() });
        }
        break header.len() - 1;
    };
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_csv_line(&line);
        let bad = |msg: String| RawrError::Parse { line: idx + 1, msg };
        if fields.len() != dims + 1 {
            return Err(bad(format!("expected {} fields, got {}", dims + 1, fields.len())));
        }
        let node: usize = fields[0].parse().map_err(|_| bad(format!("invalid node {:?}", fields[0])))?;
        if node >= num_nodes {
            return Err(RawrError::NodeOutOfRange { node, num_nodes });
        }
        let vals = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("invalid number {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if rows.insert(node, vals).is_some() {
            return Err(bad(format!("duplicate row for node {node}")));
        }
    }
    if rows.len() != num_nodes {
        return Err(RawrError::InvalidInput(format!(
            "features cover {} of {num_nodes} nodes",
            rows.len()
        )));
    }
    let data = rows.into_values().flatten().collect();
    DenseMatrix::from_vec(num_nodes, dims, data)
}

/// Parses a label CSV with header `node,label,split`.
///
/// An empty label field (or `-1`) marks an unlabeled node. Nodes missing from
/// the file are unlabeled with split `none`.
pub fn load_labels<R: BufRead>(reader: R, num_nodes: usize) -> Result<NodeData> {
    let mut labels = vec![None; num_nodes];
    let mut splits = vec![Split::None; num_nodes];
    let mut header_seen = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_csv_line(&line);
        let bad = |msg: String| RawrError::Parse { line: idx + 1, msg };
        if !header_seen {
            if fields != ["node", "label", "split"] {
                return Err(bad("header must be 'node,label,split'".into()));
            }
            header_seen = true;
            continue;
        }
        if fields.len() != 3 {
            return Err(bad(format!("expected 3 fields, got {}", fields.len())));
        }
        let node: usize = fields[0].parse().map_err(|_| bad(format!("invalid node {:?}", fields[0])))?;
        if node >= num_nodes {
            return Err(RawrError::NodeOutOfRange { node, num_nodes });
        }
        labels[node] = match fields[1] {
            "" | "-1" => None,
            s => Some(s.parse::<usize>().map_err(|_| bad(format!("invalid label {s:?}")))?),
        };
        splits[node] = Split::parse(fields[2]).ok_or_else(|| bad(format!("invalid split {:?}", fields[2])))?;
    }
    if !header_seen {
        return Err(RawrError::Parse { line: 0, msg: "missing header".into() });
    }
    let data = NodeData { features: None, labels: Some(labels), splits: Some(splits) };
    data.validate(num_nodes)?;
    Ok(data)
}

/// Writes `node,label,split` rows for every node.
pub fn write_labels(labels: &[Option<usize>], splits: &[Split]) -> String {
    let mut out = String::from("node,label,split\n");
    for (u, (l, s)) in labels.iter().zip(splits).enumerate() {
        let l = l.map_or(String::new(), |c| c.to_string());
        let _ = writeln!(out, "{u},{l},{}", s.as_str());
    }
    out
}

/// Writes a `node,f0,...` feature CSV with six decimals.
pub fn write_features(x: &DenseMatrix) -> String {
    let mut out = String::from("node");
    for j in 0..x.cols() {
        let _ = write!(out, ",f{j}");
    }
    out.push('\n');
    for r in 0..x.rows() {
        let _ = write!(out, "{r}");
        for v in x.row(r) {
            let _ = write!(out, ",{}", fmt6(*v));
        }
        out.push('\n');
    }
    out
}

/// Six-decimal formatting with negative zero folded to zero.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Graph> {
        load_edge_list(s.as_bytes())
    }

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap()
    }

    #[test]
    fn path_from_text() {
        let g = parse("0 1\n1 2").unwrap();
        assert_eq!(g.degree_stats().degrees, vec![1, 2, 1]);
    }

    #[test]
    fn reversed_edge_dedups() {
        let g = parse("# comment\n0 1\n1 0\n").unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.degree_stats().degrees, vec![1, 1]);
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(parse("0 0").unwrap_err(), RawrError::SelfLoop { node: 0, line: 1 });
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse("0 x"), Err(RawrError::Parse { line: 1, .. })));
        assert!(matches!(parse("0"), Err(RawrError::Parse { .. })));
        assert!(matches!(parse("0 1 2"), Err(RawrError::Parse { .. })));
        assert_eq!(parse("# nothing\n"), Err(RawrError::EmptyGraph));
    }

    #[test]
    fn gaps_become_isolated_nodes() {
        let g = parse("0 3").unwrap();
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(g.degree(1), 0);
    }

    #[test]
    fn percentiles() {
        let p3 = parse("0 1\n1 2").unwrap();
        assert_eq!(degree_percentile(&p3, Percentile::P0), 0.0);
        assert_eq!(degree_percentile(&p3, Percentile::P100), 2.0);
        let s = star(4);
        assert_eq!(degree_percentile(&s, Percentile::P50), 1.0);
        // sorted [1,1,1,1,4]: p25 -> idx ceil(1.25)-1 = 1, p75 -> idx ceil(3.75)-1 = 3
        assert_eq!(degree_percentile(&s, Percentile::P25), 1.0);
        assert_eq!(degree_percentile(&s, Percentile::P75), 1.0);
        assert_eq!(degree_percentile(&s, Percentile::P100), 4.0);
    }

    #[test]
    fn two_hop() {
        let p3 = parse("0 1\n1 2").unwrap();
        assert_eq!(p3.two_hop_neighbors(0), vec![2]);
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        for u in 0..4 {
            assert!(k4.two_hop_neighbors(u).is_empty());
        }
        assert_eq!(star(3).two_hop_neighbors(1), vec![2, 3]);
    }

    #[test]
    fn labels_roundtrip() {
        let text = "node,label,split\n0,1,train\n1,,none\n2,0,test\n";
        let d = load_labels(text.as_bytes(), 3).unwrap();
        assert_eq!(d.labels, Some(vec![Some(1), None, Some(0)]));
        assert_eq!(d.num_classes(), 2);
        let again = write_labels(d.labels.as_ref().unwrap(), d.splits.as_ref().unwrap());
        assert_eq!(again, text);
    }

    #[test]
    fn masked_node_needs_label() {
        let text = "node,label,split\n0,,train\n";
        assert!(matches!(load_labels(text.as_bytes(), 1), Err(RawrError::InvalidInput(_))));
    }

    #[test]
    fn features_parse() {
        let text = "node,f0,f1\n1,3,4\n0,1,2\n";
        let x = load_features(text.as_bytes(), 2).unwrap();
        assert_eq!(x, DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]));
        assert!(load_features("node,f0\n0,1\n".as_bytes(), 2).is_err());
    }
}
