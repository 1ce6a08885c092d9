//! Node partitions, ε-approximate equitable partitions and quotients.
//!
//! The refinement here starts from one block and repeatedly splits blocks
//! whose members disagree by more than ε on their neighbor count toward some
//! splitter block. At the fixpoint every block-degree coordinate spreads by
//! at most ε inside every block, which is exactly the ε-AEP condition. For
//! ε = 0 this is classic partition refinement and yields the coarsest
//! equitable partition.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{RawrError, Result};
use crate::graph::{fmt6, Graph};
use crate::linalg::DenseMatrix;

/// Partition of `0..n` into non-empty blocks, in canonical order: blocks are
/// sorted by their smallest node and nodes inside a block ascend.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Canonical partition from an arbitrary labelling (`labels[u]` is any
    /// block key for node `u`).
    pub fn from_labels<K: Ord + Clone>(labels: &[K]) -> Self {
        let mut first_seen: BTreeMap<K, usize> = BTreeMap::new();
        let mut block_of = Vec::with_capacity(labels.len());
        let mut next = 0usize;
        // nodes are visited in ascending order, so first appearance order is
        // ordering by minimum node id
        for key in labels {
            let id = *first_seen.entry(key.clone()).or_insert_with(|| {
                next += 1;
                next - 1
            });
            block_of.push(id);
        }
        let mut blocks = vec![Vec::new(); next];
        for (u, &b) in block_of.iter().enumerate() {
            blocks[b].push(u);
        }
        Partition { block_of, blocks }
    }

    /// Validates and canonicalizes an explicit block list.
    pub fn from_blocks(num_nodes: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; num_nodes];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(RawrError::InvalidInput(format!("block {b} is empty")));
            }
            for &u in block {
                if u >= num_nodes {
                    return Err(RawrError::NodeOutOfRange { node: u, num_nodes });
                }
                if labels[u] != usize::MAX {
                    return Err(RawrError::InvalidInput(format!("node {u} appears in two blocks")));
                }
                labels[u] = b;
            }
        }
        if let Some(u) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(RawrError::InvalidInput(format!("node {u} is not covered")));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn single_block(num_nodes: usize) -> Self {
        Self::from_labels(&vec![0u8; num_nodes])
    }

    pub fn singletons(num_nodes: usize) -> Self {
        Self::from_labels(&(0..num_nodes).collect::<Vec<_>>())
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.block_of.len()
    }

    /// Number of blocks `k`.
    #[inline]
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    #[inline]
    pub fn block_of(&self, u: usize) -> usize {
        self.block_of[u]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.block_of
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// `n × k` node-block incidence matrix.
    pub fn indicator(&self) -> DenseMatrix {
        let mut r = DenseMatrix::zeros(self.num_nodes(), self.num_blocks());
        for (u, &b) in self.block_of.iter().enumerate() {
            r[(u, b)] = 1.0;
        }
        r
    }

    fn check_graph(&self, graph: &Graph) -> Result<()> {
        if graph.num_nodes() != self.num_nodes() {
            return Err(RawrError::DimensionMismatch(format!(
                "partition covers {} nodes, graph has {}",
                self.num_nodes(),
                graph.num_nodes()
            )));
        }
        Ok(())
    }
}

/// Number of neighbors of `u` inside each block.
pub fn block_degree_vector(graph: &Graph, partition: &Partition, u: usize) -> Vec<usize> {
    let mut out = vec![0; partition.num_blocks()];
    for &v in graph.neighbors(u) {
        out[partition.block_of(v)] += 1;
    }
    out
}

/// Splits every block by neighbor count toward `splitter`, grouping sorted
/// counts greedily while `count - group_min <= eps`. Returns the refined
/// labelling when anything split.
fn split_by(graph: &Graph, partition: &Partition, splitter: usize, eps: f64) -> Option<Vec<(usize, usize)>> {
    let n = graph.num_nodes();
    let mut counts = vec![0usize; n];
    for &v in &partition.blocks()[splitter] {
        for &u in graph.neighbors(v) {
            counts[u] += 1;
        }
    }
    let mut changed = false;
    // label = (old block, group index within block)
    let mut labels = vec![(0usize, 0usize); n];
    let mut order = Vec::new();
    for (b, block) in partition.blocks().iter().enumerate() {
        order.clear();
        order.extend(block.iter().copied());
        order.sort_by_key(|&u| (counts[u], u));
        let mut group = 0usize;
        let mut group_min = counts[order[0]];
        for &u in &order {
            if (counts[u] - group_min) as f64 > eps {
                group += 1;
                group_min = counts[u];
                changed = true;
            }
            labels[u] = (b, group);
        }
    }
    changed.then_some(labels)
}

/// ε-approximate equitable partition by greedy threshold refinement.
///
/// Deterministic; the result satisfies [`validate_aep`] for `eps` and is the
/// coarsest equitable partition when `eps == 0`.
pub fn refine_eps_be(graph: &Graph, eps: f64) -> Partition {
    assert!(eps >= 0.0, "tolerance must be non-negative");
    let mut partition = Partition::single_block(graph.num_nodes());
    loop {
        let mut changed = false;
        let mut splitter = 0;
        while splitter < partition.num_blocks() {
            if let Some(labels) = split_by(graph, &partition, splitter, eps) {
                partition = Partition::from_labels(&labels);
                changed = true;
            }
            splitter += 1;
        }
        if !changed {
            return partition;
        }
    }
}

/// True iff every block-degree coordinate spreads by at most `eps` inside
/// every block.
pub fn validate_aep(graph: &Graph, partition: &Partition, eps: f64) -> bool {
    if partition.num_nodes() != graph.num_nodes() {
        return false;
    }
    let k = partition.num_blocks();
    partition.blocks().iter().all(|block| {
        let mut lo = vec![usize::MAX; k];
        let mut hi = vec![0usize; k];
        for &u in block {
            for (j, d) in block_degree_vector(graph, partition, u).into_iter().enumerate() {
                lo[j] = lo[j].min(d);
                hi[j] = hi[j].max(d);
            }
        }
        lo.iter().zip(&hi).all(|(&l, &h)| (h - l) as f64 <= eps)
    })
}

/// Indicator, quotient, unweighted quotient and residual of a partition.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientPair {
    /// `n × k` 0/1 membership matrix `R`.
    pub indicator: DenseMatrix,
    /// `k × k` block-averaged block degrees `Q`.
    pub quotient: DenseMatrix,
    /// `k × k` 0/1 pattern `1(Q > 0)`.
    pub pattern: DenseMatrix,
    /// `max_{u,j} |(AR - RQ)_{uj}|`.
    pub residual: f64,
}

/// `Q[i][j] = mean_{u in B_i} d(u, B_j)` plus the entrywise residual of
/// `AR = RQ`.
pub fn quotient(graph: &Graph, partition: &Partition) -> Result<QuotientPair> {
    partition.check_graph(graph)?;
    let k = partition.num_blocks();
    let n = graph.num_nodes();
    let bdv: Vec<Vec<usize>> = (0..n).map(|u| block_degree_vector(graph, partition, u)).collect();
    let mut q = DenseMatrix::zeros(k, k);
    for (i, block) in partition.blocks().iter().enumerate() {
        let size = block.len() as f64;
        for j in 0..k {
            let total: usize = block.iter().map(|&u| bdv[u][j]).sum();
            q[(i, j)] = total as f64 / size;
        }
    }
    let mut residual = 0.0f64;
    for u in 0..n {
        let i = partition.block_of(u);
        for j in 0..k {
            residual = residual.max((bdv[u][j] as f64 - q[(i, j)]).abs());
        }
    }
    let mut pattern = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if q[(i, j)] > 0.0 {
                pattern[(i, j)] = 1.0;
            }
        }
    }
    Ok(QuotientPair { indicator: partition.indicator(), quotient: q, pattern, residual })
}

/// Coarsest equitable partition via classic colour refinement
/// (1-dimensional Weisfeiler-Leman from a uniform colouring).
pub fn color_refinement_oracle(graph: &Graph) -> Partition {
    let n = graph.num_nodes();
    let mut colors = vec![0usize; n];
    let mut num_colors = 1;
    loop {
        let signatures: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|u| {
                let mut nb: Vec<usize> = graph.neighbors(u).iter().map(|&v| colors[v]).collect();
                nb.sort_unstable();
                (colors[u], nb)
            })
            .collect();
        let mut palette: BTreeMap<&(usize, Vec<usize>), usize> = BTreeMap::new();
        for sig in &signatures {
            let next = palette.len();
            palette.entry(sig).or_insert(next);
        }
        let next_colors: Vec<usize> = signatures.iter().map(|s| palette[s]).collect();
        let next_num = palette.len();
        colors = next_colors;
        if next_num == num_colors {
            return Partition::from_labels(&colors);
        }
        num_colors = next_num;
    }
}

/// Uniformly random partition with the given block-size multiset.
pub fn random_partition(n: usize, block_sizes: &[usize], seed: u64) -> Result<Partition> {
    let total: usize = block_sizes.iter().sum();
    if total != n {
        return Err(RawrError::SizeMismatch { expected: n, got: total });
    }
    if block_sizes.contains(&0) {
        return Err(RawrError::InvalidInput("block sizes must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut labels = vec![0usize; n];
    let mut pos = 0;
    for (b, &size) in block_sizes.iter().enumerate() {
        for &u in &perm[pos..pos + size] {
            labels[u] = b;
        }
        pos += size;
    }
    Ok(Partition::from_labels(&labels))
}

/// `node,block` CSV.
pub fn write_partition(partition: &Partition) -> String {
    let mut out = String::from("node,block\n");
    for (u, b) in partition.assignment().iter().enumerate() {
        let _ = writeln!(out, "{u},{b}");
    }
    out
}

pub fn load_partition<R: BufRead>(reader: R, num_nodes: usize) -> Result<Partition> {
    let mut labels = vec![None; num_nodes];
    let mut header_seen = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            if line.replace(' ', "") != "node,block" {
                return Err(RawrError::Parse { line: idx + 1, msg: "header must be 'node,block'".into() });
            }
            header_seen = true;
            continue;
        }
        let bad = || RawrError::Parse { line: idx + 1, msg: format!("invalid row {line:?}") };
        let (u, b) = line.split_once(',').ok_or_else(bad)?;
        let u: usize = u.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if u >= num_nodes {
            return Err(RawrError::NodeOutOfRange { node: u, num_nodes });
        }
        labels[u] = Some(b);
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(u, l)| l.ok_or_else(|| RawrError::InvalidInput(format!("node {u} has no block"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Partition::from_labels(&labels))
}

/// Quotient matrix CSV preceded by a `# residual=.. eps=.. k=..` line.
pub fn write_quotient(q: &QuotientPair, eps: f64) -> String {
    let k = q.quotient.rows();
    let mut out = format!("# residual={} eps={} k={k}\n", fmt6(q.residual), fmt6(eps));
    for i in 0..k {
        let row: Vec<String> = q.quotient.row(i).iter().map(|&v| fmt6(v)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|u| (u, u + 1)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn blocks(p: &Partition) -> Vec<Vec<usize>> {
        p.blocks().to_vec()
    }

    #[test]
    fn canonical_order() {
        let p = Partition::from_labels(&[5, 3, 5, 3, 9]);
        assert_eq!(blocks(&p), vec![vec![0, 2], vec![1, 3], vec![4]]);
        assert_eq!(p.assignment(), &[0, 1, 0, 1, 2]);
    }

    #[test]
    fn block_degrees_on_star() {
        let g = star(3);
        let p = Partition::from_blocks(4, &[vec![0], vec![1, 2, 3]]).unwrap();
        assert_eq!(block_degree_vector(&g, &p, 0), vec![0, 3]);
        assert_eq!(block_degree_vector(&g, &p, 1), vec![1, 0]);
        let s = Partition::singletons(4);
        let a = g.dense_adjacency();
        for u in 0..4 {
            let row: Vec<usize> = a.row(u).iter().map(|&x| x as usize).collect();
            assert_eq!(block_degree_vector(&g, &s, u), row);
        }
    }

    #[test]
    fn refine_examples() {
        assert_eq!(blocks(&refine_eps_be(&star(3), 0.0)), vec![vec![0], vec![1, 2, 3]]);
        assert_eq!(refine_eps_be(&star(3), 2.0).num_blocks(), 1);
        assert_eq!(refine_eps_be(&cycle(4), 0.0).num_blocks(), 1);
        assert_eq!(blocks(&refine_eps_be(&path(3), 0.0)), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn validate_examples() {
        let g = star(3);
        assert!(validate_aep(&g, &Partition::singletons(4), 0.0));
        assert!(!validate_aep(&g, &Partition::single_block(4), 1.0));
        let exact = Partition::from_blocks(4, &[vec![0], vec![1, 2, 3]]).unwrap();
        assert!(validate_aep(&g, &exact, 0.0));
    }

    #[test]
    fn quotient_examples() {
        let g = star(3);
        let exact = Partition::from_blocks(4, &[vec![0], vec![1, 2, 3]]).unwrap();
        let q = quotient(&g, &exact).unwrap();
        assert_eq!(q.quotient, DenseMatrix::from_rows(&[vec![0.0, 3.0], vec![1.0, 0.0]]));
        assert_eq!(q.pattern, DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
        assert_eq!(q.residual, 0.0);

        let q = quotient(&cycle(4), &Partition::single_block(4)).unwrap();
        assert_eq!(q.quotient, DenseMatrix::from_rows(&[vec![2.0]]));
        assert_eq!(q.residual, 0.0);

        let q = quotient(&g, &Partition::single_block(4)).unwrap();
        assert_eq!(q.quotient[(0, 0)], 1.5);
        assert_eq!(q.residual, 1.5);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(blocks(&color_refinement_oracle(&path(3))), vec![vec![0, 2], vec![1]]);
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(color_refinement_oracle(&k4).num_blocks(), 1);
        assert_eq!(blocks(&color_refinement_oracle(&star(3))), vec![vec![0], vec![1, 2, 3]]);
    }

    #[test]
    fn random_partition_contract() {
        assert_eq!(random_partition(4, &[4], 3).unwrap().num_blocks(), 1);
        assert_eq!(random_partition(4, &[1, 1, 1, 1], 3).unwrap(), Partition::singletons(4));
        let a = random_partition(4, &[2, 2], 7).unwrap();
        let b = random_partition(4, &[2, 2], 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            random_partition(4, &[2, 1], 7),
            Err(RawrError::SizeMismatch { expected: 4, got: 3 })
        );
    }

    #[test]
    fn partition_csv_roundtrip() {
        let p = refine_eps_be(&path(5), 0.0);
        let text = write_partition(&p);
        assert_eq!(load_partition(text.as_bytes(), 5).unwrap(), p);
    }

    #[test]
    fn from_blocks_rejects_overlap() {
        assert!(Partition::from_blocks(3, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_blocks(3, &[vec![0, 1]]).is_err());
    }
}
