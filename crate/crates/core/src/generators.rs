//! Synthetic graph families and eccentricity-binned node labels.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{RawrError, Result};
use crate::graph::{Graph, Split};

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for task `index` of a run seeded with `seed`:
/// `mix64(mix64(seed) ^ index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ index)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Star,
    Cycle,
    Path,
    Grid,
    Ladder,
    Tree,
    Caterpillar,
    Lobster,
    ErdosRenyi,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Star,
        Family::Cycle,
        Family::Path,
        Family::Grid,
        Family::Ladder,
        Family::Tree,
        Family::Caterpillar,
        Family::Lobster,
        Family::ErdosRenyi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Star => "star",
            Family::Cycle => "cycle",
            Family::Path => "path",
            Family::Grid => "grid",
            Family::Ladder => "ladder",
            Family::Tree => "tree",
            Family::Caterpillar => "caterpillar",
            Family::Lobster => "lobster",
            Family::ErdosRenyi => "er",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = RawrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Family::Path),
            "erdos-renyi" => Ok(Family::ErdosRenyi),
            _ => Family::ALL
                .into_iter()
                .find(|f| f.as_str() == s)
                .ok_or_else(|| RawrError::InvalidInput(format!("unknown family {s:?}"))),
        }
    }
}

fn need(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(RawrError::InvalidInput(msg.to_string()))
    }
}

/// `rows × cols` grid, node `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let u = r * cols + c;
            if c + 1 < cols {
                edges.push((u, u + 1));
            }
            if r + 1 < rows {
                edges.push((u, u + cols));
            }
        }
    }
    Graph::from_edges(rows * cols, &edges)
}

/// Generates a graph with exactly `n` nodes.
///
/// `Grid` uses the most square factorization `rows × cols = n`; `Ladder`
/// is `2 × n/2`; `Tree` is a complete binary tree in heap order;
/// `Caterpillar` is a spine of `ceil(n/3)` nodes with the rest attached
/// round-robin. `Lobster` and `ErdosRenyi` (edge probability `p`) depend on
/// `seed`.
pub fn generate(family: Family, n: usize, p: f64, seed: u64) -> Result<Graph> {
    need(n >= 1, "n must be positive")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = match family {
        Family::Star => {
            need(n >= 2, "star needs n >= 2")?;
            (1..n).map(|v| (0, v)).collect()
        }
        Family::Cycle => {
            need(n >= 3, "cycle needs n >= 3")?;
            (0..n).map(|u| (u, (u + 1) % n)).collect()
        }
        Family::Path => (1..n).map(|v| (v - 1, v)).collect(),
        Family::Grid => {
            let mut rows = (n as f64).sqrt() as usize;
            while rows > 1 && n % rows != 0 {
                rows -= 1;
            }
            return grid(rows.max(1), n / rows.max(1));
        }
        Family::Ladder => {
            need(n >= 4 && n % 2 == 0, "ladder needs an even n >= 4")?;
            return grid(2, n / 2);
        }
        Family::Tree => (1..n).map(|v| ((v - 1) / 2, v)).collect(),
        Family::Caterpillar => {
            let spine = n.div_ceil(3);
            let mut e: Vec<_> = (1..spine).map(|v| (v - 1, v)).collect();
            e.extend((spine..n).map(|v| ((v - spine) % spine, v)));
            e
        }
        Family::Lobster => {
            need(n >= 2, "lobster needs n >= 2")?;
            let spine = (n / 4).max(2);
            let mut e: Vec<_> = (1..spine).map(|v| (v - 1, v)).collect();
            let rest = n - spine;
            let level1_end = spine + rest.div_ceil(2);
            for v in spine..level1_end {
                e.push((rng.gen_range(0..spine), v));
            }
            for v in level1_end..n {
                e.push((rng.gen_range(spine..level1_end), v));
            }
            e
        }
        Family::ErdosRenyi => {
            need((0.0..=1.0).contains(&p), "edge probability must be in [0, 1]")?;
            let mut e = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(p) {
                        e.push((u, v));
                    }
                }
            }
            e
        }
    };
    Graph::from_edges(n, &edges)
}

/// Eccentricity-binned class labels and a seeded 60/20/20 split.
///
/// Eccentricity is taken inside each node's component; bins are equal width
/// over `[min, max]`.
pub fn eccentricity_labels(graph: &Graph, classes: usize, seed: u64) -> Result<(Vec<Option<usize>>, Vec<Split>)> {
    need(classes >= 1, "classes must be positive")?;
    let n = graph.num_nodes();
    let ecc: Vec<usize> = (0..n)
        .map(|u| graph.bfs_distances(u).into_iter().flatten().max().unwrap_or(0))
        .collect();
    let lo = *ecc.iter().min().unwrap();
    let hi = *ecc.iter().max().unwrap();
    let width = hi - lo + 1;
    let labels = ecc.iter().map(|&e| Some((e - lo) * classes / width)).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (n * 3).div_ceil(5);
    let n_val = n / 5;
    let mut splits = vec![Split::Test; n];
    for (i, &u) in order.iter().enumerate() {
        if i < n_train {
            splits[u] = Split::Train;
        } else if i < n_train + n_val {
            splits[u] = Split::Val;
        }
    }
    Ok((labels, splits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_match() {
        for family in Family::ALL {
            let g = generate(family, 24, 0.2, 3).unwrap();
            assert_eq!(g.num_nodes(), 24, "{family}");
        }
    }

    #[test]
    fn tree_like_families_are_trees() {
        for family in [Family::Path, Family::Tree, Family::Caterpillar, Family::Lobster, Family::Star] {
            let g = generate(family, 30, 0.0, 11).unwrap();
            assert_eq!(g.num_edges(), 29, "{family}");
            assert!(g.is_connected(), "{family}");
        }
    }

    #[test]
    fn grid_shape() {
        let g = generate(Family::Grid, 12, 0.0, 0).unwrap();
        // 3 x 4 grid: 3*3 + 2*4 edges
        assert_eq!(g.num_edges(), 17);
        assert_eq!(generate(Family::Ladder, 8, 0.0, 0).unwrap().num_edges(), 10);
    }

    #[test]
    fn seeded_determinism() {
        let a = generate(Family::ErdosRenyi, 20, 0.3, 5).unwrap();
        let b = generate(Family::ErdosRenyi, 20, 0.3, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(9, 4), derive_seed(9, 4));
    }

    #[test]
    fn labels_cover_classes() {
        let g = generate(Family::Path, 9, 0.0, 0).unwrap();
        let (labels, splits) = eccentricity_labels(&g, 3, 1).unwrap();
        // eccentricities 8,7,6,5,4,5,6,7,8 over width 5
        assert_eq!(labels[4], Some(0));
        assert_eq!(labels[0], Some(2));
        assert_eq!(splits.iter().filter(|&&s| s == Split::Train).count(), 6);
    }

    #[test]
    fn bad_parameters() {
        assert!(generate(Family::Ladder, 5, 0.0, 0).is_err());
        assert!(generate(Family::Cycle, 2, 0.0, 0).is_err());
        assert!("bogus".parse::<Family>().is_err());
        assert_eq!("line".parse::<Family>().unwrap(), Family::Path);
    }
}
