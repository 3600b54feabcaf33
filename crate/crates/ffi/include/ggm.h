#ifndef GGM_H
#define GGM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GgmStatus {
  GGM_STATUS_OK = 0,
  GGM_STATUS_NULL_POINTER = 1,
  GGM_STATUS_INVALID_ARGUMENT = 2,
  GGM_STATUS_DIMENSION = 3,
  GGM_STATUS_SINGULAR_CONDITIONING = 4,
  GGM_STATUS_NOT_POSITIVE_DEFINITE = 5,
  GGM_STATUS_GENERATION_FAILED = 6,
  GGM_STATUS_DEGENERATE = 7,
  GGM_STATUS_CONFIG = 8,
  GGM_STATUS_IO = 9,
  GGM_STATUS_PARSE = 10,
  GGM_STATUS_BUFFER_TOO_SMALL = 11,
  GGM_STATUS_PANIC = 12,
} GgmStatus;

typedef enum GgmTopology {
  GGM_TOPOLOGY_CHAIN = 0,
  GGM_TOPOLOGY_STAR = 1,
  GGM_TOPOLOGY_GRID = 2,
  GGM_TOPOLOGY_DIAMOND = 3,
} GgmTopology;

// Opaque model handle.
typedef struct GgmModelHandle GgmModelHandle;

typedef struct GgmParamBox {
  double alpha;
  double a;
  double b;
  double d_min;
  double d_max;
  uintptr_t delta_max;
} GgmParamBox;

// Options for [`ggm_learn_threshold`].
typedef struct GgmThresholdOptions {
  // Slack below the population bound; negative selects half the bound.
  double epsilon;
  // Absolute pruning level; non-positive selects `nu * a`.
  double tau_p;
  double nu;
  bool triangle_free;
  bool prune;
  bool symmetry;
} GgmThresholdOptions;

typedef struct GgmMetrics {
  double success_rate;
  double accuracy;
} GgmMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *ggm_last_error_message(void);

// Random walk-summable model drawn from the given parameter box.
//
// # Safety
// `params` must point to a valid `GgmParamBox` and `out` to writable
// storage for one handle pointer.
enum GgmStatus ggm_model_random(uintptr_t n,
                                const struct GgmParamBox *params,
                                bool triangle_free,
                                uint64_t seed,
                                struct GgmModelHandle **out);

// Named topology with one weight on every edge; `size` is the side length
// for grids.
//
// # Safety
// `out` must point to writable storage for one handle pointer.
enum GgmStatus ggm_model_named(enum GgmTopology topology,
                               uintptr_t size,
                               double weight,
                               double diag,
                               struct GgmModelHandle **out);

// Model from a row-major `n*n` precision matrix.
//
// # Safety
// `precision` must point to `n*n` readable doubles and `out` to writable
// storage for one handle pointer.
enum GgmStatus ggm_model_from_precision(const double *precision,
                                        uintptr_t n,
                                        struct GgmModelHandle **out);

// # Safety
// `path` must be a NUL-terminated string and `out` must point to writable
// storage for one handle pointer.
enum GgmStatus ggm_model_load(const char *path, struct GgmModelHandle **out);

// # Safety
// `model` must be a live handle and `path` a NUL-terminated string.
enum GgmStatus ggm_model_save(const struct GgmModelHandle *model, const char *path);

// # Safety
// `model` must be NULL or a handle returned by this library that has not
// been freed.
void ggm_model_free(struct GgmModelHandle *model);

// Dimension of the model, or 0 for a NULL handle.
//
// # Safety
// `model` must be NULL or a live handle.
uintptr_t ggm_model_dim(const struct GgmModelHandle *model);

// # Safety
// `model` must be a live handle and `out` must point to `len` writable doubles.
enum GgmStatus ggm_model_precision(const struct GgmModelHandle *model, double *out, uintptr_t len);

// # Safety
// `model` must be a live handle and `out` must point to `len` writable doubles.
enum GgmStatus ggm_model_covariance(const struct GgmModelHandle *model, double *out, uintptr_t len);

// True graph of the model as an `n*n` adjacency buffer.
//
// # Safety
// `model` must be a live handle and `out` must point to `len` writable bytes.
enum GgmStatus ggm_model_adjacency(const struct GgmModelHandle *model, uint8_t *out, uintptr_t len);

// Empirical covariance of `count` seeded samples from the model.
//
// # Safety
// `model` must be a live handle and `out` must point to `len` writable doubles.
enum GgmStatus ggm_sample_covariance(const struct GgmModelHandle *model,
                                     uintptr_t count,
                                     uint64_t seed,
                                     double *out,
                                     uintptr_t len);

// Thresholding learner over every node. `samples` is 0 for an exact
// covariance. `out` receives the `n*n` estimated adjacency.
//
// # Safety
// `cov` must point to `n*n` readable doubles, `params` and `options` to
// valid structs, and `out` to `n*n` writable bytes.
enum GgmStatus ggm_learn_threshold(const double *cov,
                                   uintptr_t n,
                                   uintptr_t samples,
                                   const struct GgmParamBox *params,
                                   const struct GgmThresholdOptions *options,
                                   uint8_t *out);

// Forward-backward MI learner over every node with forward threshold
// `epsilon_f` in nats.
//
// # Safety
// `cov` must point to `n*n` readable doubles and `out` to `n*n` writable bytes.
enum GgmStatus ggm_learn_mit(const double *cov,
                             uintptr_t n,
                             uintptr_t samples,
                             double epsilon_f,
                             double nu,
                             uint8_t *out);

// Forward-backward greedy regression over every node with loss threshold
// `epsilon_s`.
//
// # Safety
// `cov` must point to `n*n` readable doubles and `out` to `n*n` writable bytes.
enum GgmStatus ggm_learn_baseline(const double *cov,
                                  uintptr_t n,
                                  uintptr_t samples,
                                  double epsilon_s,
                                  double nu,
                                  uint8_t *out);

// Score an `n*n` estimated adjacency against the model's graph. Row `i` is
// the estimated neighborhood of node `i`.
//
// # Safety
// `model` must be a live handle, `adjacency` must point to `len` readable
// bytes and `out` to a writable `GgmMetrics`.
enum GgmStatus ggm_score(const struct GgmModelHandle *model,
                         const uint8_t *adjacency,
                         uintptr_t len,
                         struct GgmMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GGM_H */
