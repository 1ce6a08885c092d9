//! C ABI over the `rawr` library.
//!
//! Graphs, partitions and rewired graphs are opaque heap handles released
//! with their `*_free` function. Every fallible call returns a
//! [`RawrStatus`]; on failure [`rawr_last_error_message`] describes the
//! error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rawr::graph::{degree_percentile, load_edge_list, Percentile};
use rawr::linalg::DenseMatrix;
use rawr::metrics::{mean_effective_resistance, PairSet};
use rawr::{build_rewired, quotient, refine_eps_be, srl, Graph, Partition, RawrError, RewiredGraph, Variant};

/// Opaque graph handle.
pub struct RawrGraph(Graph);

/// Opaque partition handle.
pub struct RawrPartition(Partition);

/// Opaque rewired-graph handle.
pub struct RawrRewired(RewiredGraph);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RawrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Parse = 3,
    Numeric = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RawrVariant {
    Full = 0,
    RepNodes = 1,
    RepEdges = 2,
    MasterNode = 3,
}

impl From<RawrVariant> for Variant {
    fn from(v: RawrVariant) -> Self {
        match v {
            RawrVariant::Full => Variant::Full,
            RawrVariant::RepNodes => Variant::RepNodes,
            RawrVariant::RepEdges => Variant::RepEdges,
            RawrVariant::MasterNode => Variant::MasterNode,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &RawrError) -> RawrStatus {
    match e {
        RawrError::Parse { .. } | RawrError::SelfLoop { .. } | RawrError::Io(_) => RawrStatus::Parse,
        RawrError::NonSymmetric(_)
        | RawrError::EigenNotConverged(_)
        | RawrError::NotPositiveDefinite
        | RawrError::Divergence { .. } => RawrStatus::Numeric,
        _ => RawrStatus::InvalidInput,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard<F>(f: F) -> RawrStatus
where
    F: FnOnce() -> Result<(), (RawrStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RawrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RawrStatus::Panic
        }
    }
}

fn lib_err(e: RawrError) -> (RawrStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (RawrStatus, String) {
    (RawrStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (RawrStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), (RawrStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), (RawrStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = value;
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rawr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a whitespace separated edge list (NUL-terminated UTF-8).
///
/// # Safety
/// `text` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rawr_graph_from_edge_list(text: *const c_char, out: *mut *mut RawrGraph) -> RawrStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let bytes = CStr::from_ptr(text).to_bytes();
        let graph = load_edge_list(bytes).map_err(lib_err)?;
        store(out, RawrGraph(graph))
    })
}

/// Builds a graph on `num_nodes` nodes from `num_edges` pairs stored
/// flat in `edges` (`2 * num_edges` entries).
///
/// # Safety
/// `edges` must point to `2 * num_edges` readable values.
#[no_mangle]
pub unsafe extern "C" fn rawr_graph_from_edges(
    num_nodes: usize,
    edges: *const usize,
    num_edges: usize,
    out: *mut *mut RawrGraph,
) -> RawrStatus {
    guard(|| {
        let flat: &[usize] = if num_edges == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * num_edges)
        };
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        let graph = Graph::from_edges(num_nodes, &pairs).map_err(lib_err)?;
        store(out, RawrGraph(graph))
    })
}

/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rawr_graph_free(graph: *mut RawrGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Node count, 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rawr_graph_num_nodes(graph: *const RawrGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.num_nodes())
}

/// Edge count, 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rawr_graph_num_edges(graph: *const RawrGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.num_edges())
}

/// Tolerance at a degree percentile (0, 25, 50, 75 or 100).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rawr_degree_percentile(
    graph: *const RawrGraph,
    percentile: u32,
    out: *mut f64,
) -> RawrStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        let p = Percentile::from_value(percentile)
            .ok_or_else(|| (RawrStatus::InvalidInput, format!("unsupported percentile {percentile}")))?;
        write(out, degree_percentile(&g.0, p))
    })
}

/// Coarsest partition whose same-block nodes differ by at most `eps` in
/// every block-degree count.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rawr_partition_refine(
    graph: *const RawrGraph,
    eps: f64,
    out: *mut *mut RawrPartition,
) -> RawrStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        if !(eps >= 0.0) {
            return Err((RawrStatus::InvalidInput, format!("eps must be non-negative, got {eps}")));
        }
        store(out, RawrPartition(refine_eps_be(&g.0, eps)))
    })
}

/// # Safety
/// `partition` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rawr_partition_free(partition: *mut RawrPartition) {
    if !partition.is_null() {
        drop(Box::from_raw(partition));
    }
}

/// Block count, 0 for a null handle.
///
/// # Safety
/// `partition` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rawr_partition_num_blocks(partition: *const RawrPartition) -> usize {
    partition.as_ref().map_or(0, |p| p.0.num_blocks())
}

/// Copies the block id of every node into `out` (`len` must equal the node
/// count).
///
/// # Safety
/// `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn rawr_partition_block_of(
    partition: *const RawrPartition,
    out: *mut usize,
    len: usize,
) -> RawrStatus {
    guard(|| {
        let p = deref(partition, "partition")?;
        if len != p.0.num_nodes() {
            return Err((RawrStatus::InvalidInput, format!("buffer holds {len}, partition has {} nodes", p.0.num_nodes())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(p.0.assignment());
        Ok(())
    })
}

/// Largest entry of `|AR − RQ|` for the block-averaged quotient.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rawr_quotient_residual(
    graph: *const RawrGraph,
    partition: *const RawrPartition,
    out: *mut f64,
) -> RawrStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        let p = deref(partition, "partition")?;
        let q = quotient(&g.0, &p.0).map_err(lib_err)?;
        write(out, q.residual)
    })
}

/// Attaches one virtual node per block. `MasterNode` ignores the partition
/// and uses a single block.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rawr_rewire(
    graph: *const RawrGraph,
    partition: *const RawrPartition,
    variant: RawrVariant,
    out: *mut *mut RawrRewired,
) -> RawrStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        let p = deref(partition, "partition")?;
        let variant = Variant::from(variant);
        let single;
        let part = if variant == Variant::MasterNode {
            single = Partition::single_block(g.0.num_nodes());
            &single
        } else {
            &p.0
        };
        let q = quotient(&g.0, part).map_err(lib_err)?;
        let r = build_rewired(&g.0, part, &q, variant, None).map_err(lib_err)?;
        store(out, RawrRewired(r))
    })
}

/// # Safety
/// `rewired` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rawr_rewired_free(rewired: *mut RawrRewired) {
    if !rewired.is_null() {
        drop(Box::from_raw(rewired));
    }
}

/// Total node count (original plus virtual), 0 for a null handle.
///
/// # Safety
/// `rewired` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rawr_rewired_num_nodes(rewired: *const RawrRewired) -> usize {
    rewired.as_ref().map_or(0, |r| r.0.size())
}

/// Mean effective resistance over pairs of original nodes. With a null
/// `rewired` the original graph is measured.
///
/// # Safety
/// `graph` and `out` must be valid; `rewired` may be null.
#[no_mangle]
pub unsafe extern "C" fn rawr_mean_effective_resistance(
    graph: *const RawrGraph,
    rewired: *const RawrRewired,
    out: *mut f64,
) -> RawrStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        let value = match rewired.as_ref() {
            None => mean_effective_resistance(&g.0.dense_adjacency(), PairSet::All),
            Some(r) => mean_effective_resistance(&r.0.dense_adjacency(), PairSet::Original(g.0.num_nodes())),
        }
        .map_err(lib_err)?;
        write(out, value)
    })
}

/// Spectral role lift of a rewiring against row-major `labels`
/// (`num_nodes × classes`) for the filter `s^filter_degree`.
///
/// # Safety
/// `labels` must point to `num_nodes * classes` readable values.
#[no_mangle]
pub unsafe extern "C" fn rawr_srl(
    graph: *const RawrGraph,
    partition: *const RawrPartition,
    rewired: *const RawrRewired,
    labels: *const f64,
    classes: usize,
    filter_degree: usize,
    out: *mut f64,
) -> RawrStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        let p = deref(partition, "partition")?;
        let r = deref(rewired, "rewired")?;
        if labels.is_null() {
            return Err(null("labels"));
        }
        let n = g.0.num_nodes();
        let data = std::slice::from_raw_parts(labels, n * classes).to_vec();
        let y = DenseMatrix::from_vec(n, classes, data).map_err(lib_err)?;
        let single;
        let part = if r.0.variant() == Variant::MasterNode {
            single = Partition::single_block(n);
            &single
        } else {
            &p.0
        };
        let report = srl(&g.0, &r.0, part, &y, filter_degree).map_err(lib_err)?;
        write(out, report.srl)
    })
}
