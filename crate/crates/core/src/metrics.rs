//! Effective resistance, two-hop class similarity, the SRL* score and
//! tolerance selection over the degree-percentile grid.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{RawrError, Result};
use crate::graph::{degree_percentile, fmt6, Graph, NodeData, Percentile, Split};
use crate::linalg::{spd_inverse, DenseMatrix, SymMatrix};
use crate::partition::{quotient, refine_eps_be};
use crate::rewire::{build_rewired, RewiredGraph, Variant};
use crate::spectral::srl;

/// Which unordered node pairs a mean resistance averages over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSet {
    /// Pairs among the first `n` nodes (the original nodes of a rewiring).
    Original(usize),
    All,
}

fn is_connected(adjacency: &DenseMatrix) -> bool {
    let m = adjacency.rows();
    let dist = crate::graph::bfs(m, 0, |u| {
        adjacency.row(u).iter().enumerate().filter(move |&(v, &w)| v != u && w != 0.0).map(|(v, _)| v)
    });
    dist.iter().all(Option::is_some)
}

/// Moore-Penrose pseudoinverse of the weighted Laplacian `D − A` of a
/// connected graph (`(L + J/m)⁻¹ − J/m`). Diagonal weights are ignored.
pub fn laplacian_pseudoinverse(adjacency: &DenseMatrix) -> Result<DenseMatrix> {
    let m = adjacency.rows();
    if m == 0 || !is_connected(adjacency) {
        return Err(RawrError::Disconnected);
    }
    let shift = 1.0 / m as f64;
    let mut l = DenseMatrix::zeros(m, m);
    for u in 0..m {
        let mut deg = 0.0;
        for v in 0..m {
            if u != v {
                l[(u, v)] = -adjacency[(u, v)] + shift;
                deg += adjacency[(u, v)];
            }
        }
        l[(u, u)] = deg + shift;
    }
    let inv = spd_inverse(&SymMatrix::new(l)?)?;
    let mut out = inv;
    for u in 0..m {
        for v in 0..m {
            out[(u, v)] -= shift;
        }
    }
    Ok(out)
}

/// Mean effective resistance `L⁺_uu + L⁺_vv − 2L⁺_uv` over a pair set.
pub fn mean_effective_resistance(adjacency: &DenseMatrix, pairs: PairSet) -> Result<f64> {
    let lp = laplacian_pseudoinverse(adjacency)?;
    let n = match pairs {
        PairSet::Original(n) => n.min(adjacency.rows()),
        PairSet::All => adjacency.rows(),
    };
    if n < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            total += lp[(u, u)] + lp[(v, v)] - 2.0 * lp[(u, v)];
        }
    }
    Ok(total / (n * (n - 1) / 2) as f64)
}

/// Anything with exact-distance-two neighborhoods.
pub trait TwoHop {
    fn node_count(&self) -> usize;
    fn two_hop(&self, u: usize) -> Vec<usize>;
}

impl TwoHop for Graph {
    fn node_count(&self) -> usize {
        self.num_nodes()
    }

    fn two_hop(&self, u: usize) -> Vec<usize> {
        self.two_hop_neighbors(u)
    }
}

impl TwoHop for RewiredGraph {
    fn node_count(&self) -> usize {
        self.size()
    }

    fn two_hop(&self, u: usize) -> Vec<usize> {
        self.two_hop_neighbors(u)
    }
}

/// Two-hop neighbor class similarity.
///
/// Mean over masked labeled nodes of the fraction of their labeled
/// exact-distance-two neighbors that share their label. `labels` covers the
/// first `labels.len()` nodes; any node beyond that (virtual nodes) is
/// unlabeled.
pub fn two_hop_class_similarity<G: TwoHop>(graph: &G, labels: &[Option<usize>], mask: &[bool]) -> Result<f64> {
    let label_of = |u: usize| labels.get(u).copied().flatten();
    let mut total = 0.0;
    let mut count = 0usize;
    for (v, &masked) in mask.iter().enumerate() {
        let Some(lv) = label_of(v).filter(|_| masked) else { continue };
        let mut labeled = 0usize;
        let mut same = 0usize;
        for u in graph.two_hop(v) {
            if let Some(lu) = label_of(u) {
                labeled += 1;
                if lu == lv {
                    same += 1;
                }
            }
        }
        if labeled > 0 {
            total += same as f64 / labeled as f64;
            count += 1;
        }
    }
    if count == 0 {
        return Err(RawrError::NoEligibleNodes);
    }
    Ok(total / count as f64)
}

/// One point of the tolerance grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsCandidate {
    pub percentile: Percentile,
    pub eps: f64,
    pub k: usize,
    pub srl: f64,
    pub rho: f64,
    pub ncs2: f64,
    pub srl_star: f64,
}

/// Z-scores of `sqrt(x)` with the population standard deviation; a
/// (numerically) constant input maps to all zeros.
fn sqrt_zscores(values: &[f64]) -> Result<Vec<f64>> {
    let roots = values
        .iter()
        .map(|&x| {
            if x < -1e-12 {
                Err(RawrError::NegativeInput(x))
            } else {
                Ok(x.max(0.0).sqrt())
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = roots.len() as f64;
    let mean = roots.iter().sum::<f64>() / n;
    let var = roots.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd <= 1e-12 * mean.abs().max(1.0) {
        return Ok(vec![0.0; roots.len()]);
    }
    Ok(roots.iter().map(|r| (r - mean) / sd).collect())
}

/// Fills `srl_star = ρ^¼ z(SRL) + (1 − ρ^¼) z(2NCS)` for every candidate.
pub fn srl_star(candidates: &mut [EpsCandidate]) -> Result<()> {
    if candidates.is_empty() {
        return Err(RawrError::InvalidInput("no candidates".into()));
    }
    let z_srl = sqrt_zscores(&candidates.iter().map(|c| c.srl).collect::<Vec<_>>())?;
    let z_ncs = sqrt_zscores(&candidates.iter().map(|c| c.ncs2).collect::<Vec<_>>())?;
    for (c, (zs, zn)) in candidates.iter_mut().zip(z_srl.into_iter().zip(z_ncs)) {
        let w = c.rho.clamp(0.0, 1.0).powf(0.25);
        c.srl_star = w * zs + (1.0 - w) * zn;
    }
    Ok(())
}

/// Index of the candidate with the largest SRL*; ties go to the smaller
/// percentile.
pub fn select_epsilon(candidates: &[EpsCandidate]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let cb = &candidates[b];
                let better = c.srl_star > cb.srl_star
                    || (c.srl_star == cb.srl_star && c.percentile < cb.percentile);
                Some(if better { i } else { b })
            }
        };
    }
    best
}

/// Evaluates every grid percentile on `graph` using training labels only.
pub fn evaluate_candidates(
    graph: &Graph,
    data: &NodeData,
    variant: Variant,
    grid: &[Percentile],
    filter_degree: usize,
) -> Result<Vec<EpsCandidate>> {
    let labels = data.labels.as_ref().ok_or_else(|| RawrError::InvalidInput("labels required".into()))?;
    let train = data.mask(Split::Train);
    if train.len() != graph.num_nodes() {
        return Err(RawrError::InvalidInput("splits required".into()));
    }
    let train_labels: Vec<Option<usize>> =
        labels.iter().zip(&train).map(|(&l, &m)| if m { l } else { None }).collect();
    let y = data.one_hot(&train, data.num_classes());

    let mut candidates = grid
        .par_iter()
        .map(|&p| {
            let eps = degree_percentile(graph, p);
            let partition = match variant {
                Variant::MasterNode => crate::partition::Partition::single_block(graph.num_nodes()),
                _ => refine_eps_be(graph, eps),
            };
            let q = quotient(graph, &partition)?;
            let rewired = build_rewired(graph, &partition, &q, variant, data.features.as_ref())?;
            let report = srl(graph, &rewired, &partition, &y, filter_degree)?;
            let ncs2 = two_hop_class_similarity(&rewired, &train_labels, &train)?;
            Ok(EpsCandidate {
                percentile: p,
                eps,
                k: partition.num_blocks(),
                srl: report.srl,
                rho: report.rho,
                ncs2,
                srl_star: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    srl_star(&mut candidates)?;
    Ok(candidates)
}

/// `percentile,eps,k,srl,rho,ncs2,srl_star,selected` table.
pub fn write_candidates(candidates: &[EpsCandidate], selected: Option<usize>) -> String {
    let mut out = String::from("percentile,eps,k,srl,rho,ncs2,srl_star,selected\n");
    for (i, c) in candidates.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.percentile.value(),
            fmt6(c.eps),
            c.k,
            fmt6(c.srl),
            fmt6(c.rho),
            fmt6(c.ncs2),
            fmt6(c.srl_star),
            u8::from(selected == Some(i))
        );
    }
    out
}

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}
