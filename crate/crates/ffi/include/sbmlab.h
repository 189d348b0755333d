#ifndef SBMLAB_H
#define SBMLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SbmStatus {
  SBM_STATUS_OK = 0,
  SBM_STATUS_INVALID_INPUT = 2,
  SBM_STATUS_NOT_CONVERGED = 3,
  SBM_STATUS_IO = 4,
  SBM_STATUS_NULL_POINTER = 5,
  SBM_STATUS_PANIC = 6,
} SbmStatus;

typedef enum SbmProblem {
  SBM_PROBLEM_SYM = 0,
  SBM_PROBLEM_ASYM = 1,
} SbmProblem;

/**
 * Opaque labelled graph.
 */
typedef struct SbmGraph SbmGraph;

typedef struct SbmThreshold {
  double value;
  double argmax_t;
} SbmThreshold;

typedef struct SbmWitness {
  bool found;
  double x1;
  double y1;
  double x2;
  double y2;
  double slope;
  double gap;
  double delta;
  double epsilon;
} SbmWitness;

typedef struct SbmSwap {
  size_t i;
  size_t j;
  /**
   * Change in the partition objective; positive means improving.
   */
  int64_t delta;
} SbmSwap;

typedef struct SbmSdpSummary {
  /**
   * 0 converged, 1 iteration limit, 2 infeasible.
   */
  int32_t status;
  size_t iterations;
  double objective;
  double planted_objective;
  /**
   * NaN unless converged.
   */
  double gap;
  /**
   * NaN unless converged.
   */
  double relative_distance;
} SbmSdpSummary;

typedef struct SbmCertificateSummary {
  bool valid;
  size_t valid_lambdas;
  size_t grid_size;
  double best_lambda;
  double eta;
  double h_min;
  double b_min;
  double lambda2;
  double failure_statistic;
} SbmCertificateSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *sbm_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *sbm_last_error(void);

/**
 * Sample `SBM(n, α1, α2, β)` with the first `n/2` vertices in community 1.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by
 * the caller.
 */
enum SbmStatus sbm_graph_sample(size_t n,
                                double alpha1,
                                double alpha2,
                                double beta,
                                uint64_t seed,
                                struct SbmGraph **out);

/**
 * Read a graph in the text format.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum SbmStatus sbm_graph_read(const char *path, struct SbmGraph **out);

/**
 * Write a graph in the text format.
 *
 * # Safety
 * `g` must be a live handle and `path` a nul-terminated string.
 */
enum SbmStatus sbm_graph_write(const struct SbmGraph *g, const char *path);

/**
 * Release a handle; null is ignored.
 *
 * # Safety
 * `g` must be null or a handle from this library not yet freed.
 */
void sbm_graph_free(struct SbmGraph *g);

/**
 * Vertex count, or 0 for null.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t sbm_graph_n(const struct SbmGraph *g);

/**
 * Edge count, or 0 for null.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t sbm_graph_edge_count(const struct SbmGraph *g);

/**
 * Copy the ±1 planted labels into `labels[0..len]`; `len` must equal n.
 *
 * # Safety
 * `labels` must point to `len` writable bytes.
 */
enum SbmStatus sbm_graph_labels(const struct SbmGraph *g, int8_t *labels, size_t len);

/**
 * Threshold value `IT(α1, α2, β)` and its maximiser.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SbmStatus sbm_it_value(double alpha1, double alpha2, double beta, struct SbmThreshold *out);

/**
 * The `α1` with `IT(α1, alpha2, β) = 1`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SbmStatus sbm_boundary_alpha(double beta, double alpha2, double *out);

/**
 * Witness pair of cloud extremes; `found` is false when the clouds are
 * separated by `x = y`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SbmStatus sbm_find_witness(double alpha1, double alpha2, double beta, struct SbmWitness *out);

/**
 * Best single swap at the planted labelling.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum SbmStatus sbm_best_swap(const struct SbmGraph *g, struct SbmSwap *out);

/**
 * Solve a relaxation. Rates are used only for [`SbmProblem::Asym`];
 * `tol <= 0` and `max_iter == 0` keep the solver defaults. When `matrix`
 * is non-null it receives the n×n solution in row-major order. A
 * non-converged solve fills `out` and returns `NotConverged`.
 *
 * # Safety
 * `g` must be a live handle, `out` valid, and `matrix` null or `n*n`
 * writable doubles.
 */
enum SbmStatus sbm_sdp_solve(const struct SbmGraph *g,
                             enum SbmProblem problem,
                             double alpha1,
                             double alpha2,
                             double beta,
                             double tol,
                             size_t max_iter,
                             struct SbmSdpSummary *out,
                             double *matrix);

/**
 * Dual certificate sweep over the default λ grid.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum SbmStatus sbm_certificate(const struct SbmGraph *g,
                               double alpha1,
                               double alpha2,
                               double beta,
                               double tol,
                               struct SbmCertificateSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SBMLAB_H */
