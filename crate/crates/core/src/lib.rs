//! Role-aware graph rewiring.
//!
//! Approximate equitable partitions group nodes into roles; the quotient of
//! the partition is attached to the graph as virtual nodes. The crate also
//! scores rewirings (spectral role lift, two-hop class similarity, effective
//! resistance) and runs a linear GNN teacher-student experiment.

pub mod cli;
pub mod error;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod partition;
pub mod rewire;
pub mod spectral;
pub mod teacher_student;

pub use error::{RawrError, Result};
pub use graph::{Graph, NodeData, Percentile, Split};
pub use linalg::{DenseMatrix, SymMatrix};
pub use partition::{quotient, refine_eps_be, Partition, QuotientPair};
pub use rewire::{build_rewired, RewiredGraph, Variant};
pub use spectral::{srl, SrlReport};
