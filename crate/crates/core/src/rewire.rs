//! Role-aware rewiring: one virtual node per block of a partition, joined to
//! every member of its block, with the virtual-virtual block taken from the
//! quotient (`Full`), left empty (`RepNodes`) or set to the quotient's
//! support (`RepEdges`).

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{RawrError, Result};
use crate::graph::{fmt6, Graph};
use crate::linalg::DenseMatrix;
use crate::partition::{quotient, Partition, QuotientPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Full,
    RepNodes,
    RepEdges,
    MasterNode,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::RepNodes => "repnodes",
            Variant::RepEdges => "repedges",
            Variant::MasterNode => "mn",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = RawrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "repnodes" => Ok(Variant::RepNodes),
            "repedges" => Ok(Variant::RepEdges),
            "mn" | "master" => Ok(Variant::MasterNode),
            other => Err(RawrError::InvalidInput(format!("unknown variant {other:?}"))),
        }
    }
}

/// Augmented graph over `n` original nodes followed by `k` virtual nodes.
///
/// The adjacency is stored weighted and symmetric; a diagonal entry is a
/// self-loop weight (only the `Full` variant produces those, from `Q_ii`).
#[derive(Clone, Debug, PartialEq)]
pub struct RewiredGraph {
    origin_count: usize,
    virtual_count: usize,
    variant: Variant,
    offsets: Vec<usize>,
    entries: Vec<(usize, f64)>,
    /// `(n+k) × (d+k)` block-diagonal features `[X 0; 0 I_k]`.
    pub features: DenseMatrix,
}

impl RewiredGraph {
    #[inline]
    pub fn size(&self) -> usize {
        self.origin_count + self.virtual_count
    }

    #[inline]
    pub fn origin_count(&self) -> usize {
        self.origin_count
    }

    #[inline]
    pub fn virtual_count(&self) -> usize {
        self.virtual_count
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Weighted neighbors of `u` (ascending), including a self-loop if any.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.entries[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        let row = self.neighbors(u);
        row.binary_search_by_key(&v, |&(w, _)| w).map_or(0.0, |i| row[i].1)
    }

    pub fn dense_adjacency(&self) -> DenseMatrix {
        let m = self.size();
        let mut a = DenseMatrix::zeros(m, m);
        for u in 0..m {
            for &(v, w) in self.neighbors(u) {
                a[(u, v)] = w;
            }
        }
        a
    }

    /// Shortest-path (hop) distances ignoring weights and self-loops.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        crate::graph::bfs(self.size(), source, |u| {
            self.neighbors(u).iter().map(|&(v, _)| v).filter(move |&v| v != u)
        })
    }

    /// Nodes at hop distance exactly two from `u`, ascending.
    pub fn two_hop_neighbors(&self, u: usize) -> Vec<usize> {
        let mut out = std::collections::BTreeSet::new();
        for &(v, _) in self.neighbors(u) {
            if v == u {
                continue;
            }
            for &(w, _) in self.neighbors(v) {
                if w != u && w != v && self.weight(u, w) == 0.0 {
                    out.insert(w);
                }
            }
        }
        out.into_iter().collect()
    }

    /// The graph induced on the original nodes.
    pub fn original_subgraph(&self) -> Result<Graph> {
        let n = self.origin_count;
        let mut edges = Vec::new();
        for u in 0..n {
            for &(v, _) in self.neighbors(u) {
                if u < v && v < n {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, &edges)
    }

    /// Weighted edge list `u v w` (`u <= v`, six decimals).
    pub fn write_edge_list(&self) -> String {
        let mut out = String::new();
        for u in 0..self.size() {
            for &(v, w) in self.neighbors(u) {
                if u <= v {
                    let _ = writeln!(out, "{u} {v} {}", fmt6(w));
                }
            }
        }
        out
    }

    /// `key=value` sidecar; reals are written at full precision.
    pub fn write_metadata(&self, eps: f64, residual: f64) -> String {
        format!(
            "n={}\nk={}\nvariant={}\neps={eps:?}\nresidual={residual:?}\n",
            self.origin_count, self.virtual_count, self.variant
        )
    }
}

/// `[X 0; 0 I_k]`. Without features every original node gets a single
/// constant feature 1.
pub fn augment_features(x: Option<&DenseMatrix>, num_nodes: usize, k: usize) -> Result<DenseMatrix> {
    let ones;
    let x = match x {
        Some(x) => {
            if x.rows() != num_nodes {
                return Err(RawrError::DimensionMismatch(format!(
                    "{} feature rows for {num_nodes} nodes",
                    x.rows()
                )));
            }
            x
        }
        None => {
            ones = DenseMatrix::from_vec(num_nodes, 1, vec![1.0; num_nodes])?;
            &ones
        }
    };
    let d = x.cols();
    let mut out = DenseMatrix::zeros(num_nodes + k, d + k);
    for r in 0..num_nodes {
        out.row_mut(r)[..d].copy_from_slice(x.row(r));
    }
    for j in 0..k {
        out[(num_nodes + j, d + j)] = 1.0;
    }
    Ok(out)
}

/// Builds the augmented graph.
///
/// `MasterNode` ignores `partition`/`quotient` and uses a single block.
/// In the `Full` variant the virtual-virtual weight between blocks `i` and
/// `j` is `sqrt(Q_ij * Q_ji)`, the symmetric form of the block-averaged
/// quotient (it equals `Q_ij` whenever `Q` is symmetric and keeps the
/// support of `Q`); diagonal entries `Q_ii` become self-loops.
pub fn build_rewired(
    graph: &Graph,
    partition: &Partition,
    quotient_pair: &QuotientPair,
    variant: Variant,
    features: Option<&DenseMatrix>,
) -> Result<RewiredGraph> {
    let n = graph.num_nodes();
    if variant == Variant::MasterNode {
        let single = Partition::single_block(n);
        let q = quotient(graph, &single)?;
        let mut g = build_rewired(graph, &single, &q, Variant::RepNodes, features)?;
        g.variant = Variant::MasterNode;
        return Ok(g);
    }
    let k = partition.num_blocks();
    if partition.num_nodes() != n
        || quotient_pair.indicator.rows() != n
        || quotient_pair.indicator.cols() != k
        || quotient_pair.quotient.rows() != k
        || quotient_pair.quotient.cols() != k
    {
        return Err(RawrError::DimensionMismatch(format!(
            "graph n={n}, partition n={} k={k}, quotient {}x{}",
            partition.num_nodes(),
            quotient_pair.quotient.rows(),
            quotient_pair.quotient.cols()
        )));
    }

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + k];
    for u in 0..n {
        rows[u].extend(graph.neighbors(u).iter().map(|&v| (v, 1.0)));
        let vn = n + partition.block_of(u);
        rows[u].push((vn, 1.0));
        rows[vn].push((u, 1.0));
    }
    let q = &quotient_pair.quotient;
    for i in 0..k {
        for j in 0..k {
            let w = match variant {
                Variant::RepNodes | Variant::MasterNode => 0.0,
                Variant::RepEdges => quotient_pair.pattern[(i, j)],
                Variant::Full if i == j => q[(i, i)],
                Variant::Full => (q[(i, j)] * q[(j, i)]).sqrt(),
            };
            if w != 0.0 {
                rows[n + i].push((n + j, w));
            }
        }
    }
    let mut offsets = Vec::with_capacity(n + k + 1);
    let mut entries = Vec::new();
    offsets.push(0);
    for mut row in rows {
        row.sort_by_key(|&(v, _)| v);
        entries.extend(row);
        offsets.push(entries.len());
    }
    Ok(RewiredGraph {
        origin_count: n,
        virtual_count: k,
        variant,
        offsets,
        entries,
        features: augment_features(features, n, k)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::refine_eps_be;

    fn star3() -> Graph {
        Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    fn rewire(g: &Graph, eps: f64, variant: Variant) -> RewiredGraph {
        let p = refine_eps_be(g, eps);
        let q = quotient(g, &p).unwrap();
        build_rewired(g, &p, &q, variant, None).unwrap()
    }

    #[test]
    fn star_repnodes() {
        let g = star3();
        let r = rewire(&g, 0.0, Variant::RepNodes);
        assert_eq!(r.size(), 6);
        assert_eq!(r.neighbors(4), &[(0, 1.0)]);
        assert_eq!(r.neighbors(5), &[(1, 1.0), (2, 1.0), (3, 1.0)]);
        for (u, v) in [(1, 2), (1, 3), (2, 3)] {
            assert_eq!(r.bfs_distances(u)[v], Some(2));
        }
        assert_eq!(r.original_subgraph().unwrap(), g);
    }

    #[test]
    fn star_repedges_links_virtual_nodes() {
        let r = rewire(&star3(), 0.0, Variant::RepEdges);
        assert_eq!(r.weight(4, 5), 1.0);
        assert_eq!(r.weight(5, 4), 1.0);
        assert_eq!(r.weight(4, 4), 0.0);
    }

    #[test]
    fn full_variant_is_symmetric() {
        let r = rewire(&star3(), 0.0, Variant::Full);
        // Q = [[0,3],[1,0]] -> sqrt(3)
        assert_eq!(r.weight(4, 5), 3f64.sqrt());
        assert_eq!(r.dense_adjacency().asymmetry(), Some(0.0));
    }

    #[test]
    fn master_node_matches_single_block_repnodes() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let p = refine_eps_be(&g, 0.0);
        let q = quotient(&g, &p).unwrap();
        let mn = build_rewired(&g, &p, &q, Variant::MasterNode, None).unwrap();
        assert_eq!(mn.virtual_count(), 1);
        for u in 0..5 {
            assert_eq!(mn.weight(u, 5), 1.0);
        }
        let single = Partition::single_block(5);
        let qs = quotient(&g, &single).unwrap();
        let rn = build_rewired(&g, &single, &qs, Variant::RepNodes, None).unwrap();
        assert_eq!(mn.dense_adjacency(), rn.dense_adjacency());
    }

    #[test]
    fn augment_examples() {
        let x = DenseMatrix::identity(2);
        assert_eq!(augment_features(Some(&x), 2, 1).unwrap(), DenseMatrix::identity(3));

        let f = augment_features(None, 3, 2).unwrap();
        let expected = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert_eq!(f, expected);

        let z = augment_features(Some(&DenseMatrix::zeros(2, 3)), 2, 2).unwrap();
        assert_eq!(z.rows(), 4);
        assert_eq!(z.cols(), 5);
        let nonzero: Vec<_> = (0..4)
            .flat_map(|r| (0..5).map(move |c| (r, c)))
            .filter(|&(r, c)| z[(r, c)] != 0.0)
            .collect();
        assert_eq!(nonzero, vec![(2, 3), (3, 4)]);
    }

    #[test]
    fn dimension_mismatch() {
        let g = star3();
        let p = Partition::single_block(3);
        let q = quotient(&Graph::from_edges(3, &[(0, 1)]).unwrap(), &p).unwrap();
        assert!(matches!(
            build_rewired(&g, &p, &q, Variant::RepNodes, None),
            Err(RawrError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn variant_parse() {
        assert_eq!("repedges".parse::<Variant>().unwrap(), Variant::RepEdges);
        assert!("bogus".parse::<Variant>().is_err());
    }
}
