#![allow(dead_code)]

pub mod oracle;

use rawr::generators::{derive_seed, generate, Family};
use rawr::Graph;

/// Stars, cycles, paths, grids, ladders, binary trees and seeded
/// Erdős–Rényi graphs, all with at most 64 nodes.
pub fn corpus() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    let mut push = |family: Family, n: usize, p: f64, seed: u64| {
        let g = generate(family, n, p, seed).unwrap();
        let tag = match family {
            Family::ErdosRenyi => format!("er-{n}-{p}-{seed}"),
            _ => format!("{family}-{n}"),
        };
        out.push((tag, g));
    };
    for m in 1..=8 {
        push(Family::Star, m + 1, 0.0, 0);
    }
    for n in [3, 4, 5, 6, 8, 12, 16, 32, 64] {
        push(Family::Cycle, n, 0.0, 0);
    }
    for n in [2, 3, 4, 5, 8, 16, 32, 64] {
        push(Family::Path, n, 0.0, 0);
    }
    for n in [4, 6, 9, 12, 16, 25, 36, 64] {
        push(Family::Grid, n, 0.0, 0);
    }
    for n in [4, 6, 8, 16, 32, 64] {
        push(Family::Ladder, n, 0.0, 0);
    }
    for n in [3, 7, 15, 31, 63] {
        push(Family::Tree, n, 0.0, 0);
    }
    for n in [16, 32, 64] {
        for p in [0.1, 0.3] {
            for i in 0..2 {
                push(Family::ErdosRenyi, n, p, derive_seed(n as u64, i));
            }
        }
    }
    out
}
