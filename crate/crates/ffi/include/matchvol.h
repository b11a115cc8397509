#ifndef MATCHVOL_H
#define MATCHVOL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MvMode {
  MV_MODE_AUTO = 0,
  MV_MODE_GRAPH = 1,
  MV_MODE_MCS = 2,
} MvMode;

typedef enum MvStatus {
  MV_STATUS_OK = 0,
  // Malformed input, bad argument or null pointer.
  MV_STATUS_INVALID_INPUT = 2,
  // δ outside the certified range and `force` not set.
  MV_STATUS_INADMISSIBLE = 3,
  // A size or dimension cap was exceeded.
  MV_STATUS_RESOURCE_LIMIT = 4,
  // Internal invariant violation or panic.
  MV_STATUS_INTERNAL = 5,
} MvStatus;

// Opaque hypergraph handle.
typedef struct MvHypergraph MvHypergraph;

// Opaque result handle.
typedef struct MvResult MvResult;

// Zero-valued fields select the defaults.
typedef struct MvOptions {
  enum MvMode mode;
  size_t max_cluster_size;
  size_t dimension_cap;
  bool force;
} MvOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *mv_last_error_message(void);

// Options with every field at its default.
struct MvOptions mv_options_default(void);

// Parses the instance text format (one hyperedge per line, `#` comments).
//
// # Safety
// `text` must be a nul-terminated string and `out` a valid pointer.
enum MvStatus mv_hypergraph_parse(const char *text, struct MvHypergraph **out);

// Builds a hypergraph from edges in compressed form: edge `i` is
// `vertices[offsets[i] .. offsets[i+1]]`, so `offsets` has `edge_count + 1`
// entries.
//
// # Safety
// `vertices` must hold `offsets[edge_count]` entries, `offsets` must hold
// `edge_count + 1` entries, and `out` must be valid.
enum MvStatus mv_hypergraph_from_edges(const uint32_t *vertices,
                                       const size_t *offsets,
                                       size_t edge_count,
                                       struct MvHypergraph **out);

// # Safety
// `h` must come from this library and not be used afterwards; null is ignored.
void mv_hypergraph_free(struct MvHypergraph *h);

// # Safety
// `h` must be a live handle.
size_t mv_hypergraph_num_vertices(const struct MvHypergraph *h);

// # Safety
// `h` must be a live handle.
size_t mv_hypergraph_num_edges(const struct MvHypergraph *h);

// # Safety
// `h` must be a live handle.
size_t mv_hypergraph_max_degree(const struct MvHypergraph *h);

// Runs the cluster-expansion approximation. `delta` is a rational literal
// such as `"1/250"`; `options` may be null.
//
// # Safety
// `h` must be a live handle, `delta` nul-terminated, `options` null or valid,
// and `out` valid.
enum MvStatus mv_approximate_volume(const struct MvHypergraph *h,
                                    const char *delta,
                                    double epsilon,
                                    const struct MvOptions *options,
                                    struct MvResult **out);

// # Safety
// `r` must come from this library and not be used afterwards; null is ignored.
void mv_result_free(struct MvResult *r);

// Natural log of the volume estimate; NaN for a null handle.
//
// # Safety
// `r` must be a live handle.
double mv_result_log_volume(const struct MvResult *r);

// # Safety
// `r` must be a live handle.
double mv_result_volume(const struct MvResult *r);

// Volume as a 20-digit decimal string owned by the result.
//
// # Safety
// `r` must be a live handle.
const char *mv_result_volume_string(const struct MvResult *r);

// The truncated `log Ξ` as an exact fraction `p/q`, owned by the result.
//
// # Safety
// `r` must be a live handle.
const char *mv_result_log_xi(const struct MvResult *r);

// # Safety
// `r` must be a live handle.
size_t mv_result_truncation_depth(const struct MvResult *r);

// Bound on the discarded part of `log Ξ`.
//
// # Safety
// `r` must be a live handle.
double mv_result_tail_bound(const struct MvResult *r);

// False for forced runs outside the certified range.
//
// # Safety
// `r` must be a live handle.
bool mv_result_guarantee(const struct MvResult *r);

// # Safety
// `r` must be a live handle.
size_t mv_result_cluster_count(const struct MvResult *r);

// Exact volume of the truncated polytope as a fraction string; release it
// with `mv_string_free`.
//
// # Safety
// `h` must be a live handle, `delta` nul-terminated and `out` valid.
enum MvStatus mv_volume_exact(const struct MvHypergraph *h,
                              const char *delta,
                              size_t dimension_cap,
                              char **out);

// # Safety
// `s` must come from this library and not be used afterwards; null is ignored.
void mv_string_free(char *s);

// Library version, statically allocated.
const char *mv_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MATCHVOL_H */
