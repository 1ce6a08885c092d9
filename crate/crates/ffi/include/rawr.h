#ifndef RAWR_H
#define RAWR_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RawrStatus {
  RAWR_STATUS_OK = 0,
  RAWR_STATUS_NULL_POINTER = 1,
  RAWR_STATUS_INVALID_INPUT = 2,
  RAWR_STATUS_PARSE = 3,
  RAWR_STATUS_NUMERIC = 4,
  RAWR_STATUS_PANIC = 5,
} RawrStatus;

typedef enum RawrVariant {
  RAWR_VARIANT_FULL = 0,
  RAWR_VARIANT_REP_NODES = 1,
  RAWR_VARIANT_REP_EDGES = 2,
  RAWR_VARIANT_MASTER_NODE = 3,
} RawrVariant;

// Opaque graph handle.
typedef struct RawrGraph RawrGraph;

// Opaque partition handle.
typedef struct RawrPartition RawrPartition;

// Opaque rewired-graph handle.
typedef struct RawrRewired RawrRewired;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *rawr_last_error_message(void);

// Parses a whitespace separated edge list (NUL-terminated UTF-8).
//
// # Safety
// `text` must be a valid C string and `out` a valid pointer.
enum RawrStatus rawr_graph_from_edge_list(const char *text, struct RawrGraph **out);

// Builds a graph on `num_nodes` nodes from `num_edges` pairs stored
// flat in `edges` (`2 * num_edges` entries).
//
// # Safety
// `edges` must point to `2 * num_edges` readable values.
enum RawrStatus rawr_graph_from_edges(uintptr_t num_nodes,
                                      const uintptr_t *edges,
                                      uintptr_t num_edges,
                                      struct RawrGraph **out);

// # Safety
// `graph` must come from this library and not be used afterwards.
void rawr_graph_free(struct RawrGraph *graph);

// Node count, 0 for a null handle.
//
// # Safety
// `graph` must be null or a live handle.
uintptr_t rawr_graph_num_nodes(const struct RawrGraph *graph);

// Edge count, 0 for a null handle.
//
// # Safety
// `graph` must be null or a live handle.
uintptr_t rawr_graph_num_edges(const struct RawrGraph *graph);

// Tolerance at a degree percentile (0, 25, 50, 75 or 100).
//
// # Safety
// Pointers must be valid.
enum RawrStatus rawr_degree_percentile(const struct RawrGraph *graph,
                                       uint32_t percentile,
                                       double *out);

// Coarsest partition whose same-block nodes differ by at most `eps` in
// every block-degree count.
//
// # Safety
// Pointers must be valid.
enum RawrStatus rawr_partition_refine(const struct RawrGraph *graph,
                                      double eps,
                                      struct RawrPartition **out);

// # Safety
// `partition` must come from this library and not be used afterwards.
void rawr_partition_free(struct RawrPartition *partition);

// Block count, 0 for a null handle.
//
// # Safety
// `partition` must be null or a live handle.
uintptr_t rawr_partition_num_blocks(const struct RawrPartition *partition);

// Copies the block id of every node into `out` (`len` must equal the node
// count).
//
// # Safety
// `out` must point to `len` writable values.
enum RawrStatus rawr_partition_block_of(const struct RawrPartition *partition,
                                        uintptr_t *out,
                                        uintptr_t len);

// Largest entry of `|AR − RQ|` for the block-averaged quotient.
//
// # Safety
// Pointers must be valid.
enum RawrStatus rawr_quotient_residual(const struct RawrGraph *graph,
                                       const struct RawrPartition *partition,
                                       double *out);

// Attaches one virtual node per block. `MasterNode` ignores the partition
// and uses a single block.
//
// # Safety
// Pointers must be valid.
enum RawrStatus rawr_rewire(const struct RawrGraph *graph,
                            const struct RawrPartition *partition,
                            enum RawrVariant variant,
                            struct RawrRewired **out);

// # Safety
// `rewired` must come from this library and not be used afterwards.
void rawr_rewired_free(struct RawrRewired *rewired);

// Total node count (original plus virtual), 0 for a null handle.
//
// # Safety
// `rewired` must be null or a live handle.
uintptr_t rawr_rewired_num_nodes(const struct RawrRewired *rewired);

// Mean effective resistance over pairs of original nodes. With a null
// `rewired` the original graph is measured.
//
// # Safety
// `graph` and `out` must be valid; `rewired` may be null.
enum RawrStatus rawr_mean_effective_resistance(const struct RawrGraph *graph,
                                               const struct RawrRewired *rewired,
                                               double *out);

// Spectral role lift of a rewiring against row-major `labels`
// (`num_nodes × classes`) for the filter `s^filter_degree`.
//
// # Safety
// `labels` must point to `num_nodes * classes` readable values.
enum RawrStatus rawr_srl(const struct RawrGraph *graph,
                         const struct RawrPartition *partition,
                         const struct RawrRewired *rewired,
                         const double *labels,
                         uintptr_t classes,
                         uintptr_t filter_degree,
                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAWR_H */
