/* C interface to the tcosep coseparable tensor factorization library. */

#pragma once

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Sampling distribution selector for `tcosep_tcur_deim_select`.
typedef enum TcosepDist {
  TCOSEP_DIST_UNIFORM = 0,
  TCOSEP_DIST_SLICE_SIZE = 1,
  TCOSEP_DIST_LEVERAGE = 2,
} TcosepDist;

// DEIM pairing selector: 0 keeps the always-well-defined pairing
// (W feeds rows); 1 runs the transposed pairing exactly as printed,
// which can fail on unequal sample sets.
typedef enum TcosepPairing {
  TCOSEP_PAIRING_SWAPPED = 0,
  TCOSEP_PAIRING_PRINTED = 1,
} TcosepPairing;

// Result of every fallible call.
typedef enum TcosepStatus {
  TCOSEP_OK = 0,
  // A required pointer argument was null.
  TCOSEP_NULL_ARGUMENT = 1,
  // Sizes, indices or parameters were rejected.
  TCOSEP_INVALID_ARGUMENT = 2,
  // The computation itself failed; see `tcosep_last_error_message`.
  TCOSEP_RUNTIME_ERROR = 3,
} TcosepStatus;

// Opaque recovered coseparable model.
typedef struct TcosepModel TcosepModel;

// Opaque dense real third-order tensor.
typedef struct TcosepTensor TcosepTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. The
// pointer stays valid until the next library call on the same thread.
const char *tcosep_last_error_message(void);

// Creates an `m × n × p` tensor from `len = m·n·p` entries in storage
// order. The entries are copied.
//
// # Safety
// `data` must point to `len` readable doubles; `out` must be a valid
// output slot.
enum TcosepStatus tcosep_tensor_create(uintptr_t m,
                                       uintptr_t n,
                                       uintptr_t p,
                                       const double *data,
                                       uintptr_t len,
                                       struct TcosepTensor **out);

// Frees a tensor handle; a null pointer is ignored.
//
// # Safety
// `t` must be a handle returned by this library, not yet freed.
void tcosep_tensor_free(struct TcosepTensor *t);

// Writes the dimensions of `t` into `m`, `n`, `p`.
//
// # Safety
// All pointers must be valid.
enum TcosepStatus tcosep_tensor_dims(const struct TcosepTensor *t,
                                     uintptr_t *m,
                                     uintptr_t *n,
                                     uintptr_t *p);

// Copies the entries of `t` (storage order) into `buf` of capacity
// `len`, which must be exactly `m·n·p`.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum TcosepStatus tcosep_tensor_copy_data(const struct TcosepTensor *t, double *buf, uintptr_t len);

// Reads a `.t3t` tensor file.
//
// # Safety
// `path` must be a NUL-terminated string, `out` a valid slot.
enum TcosepStatus tcosep_tensor_read_t3t(const char *path, struct TcosepTensor **out);

// Writes a `.t3t` tensor file (17 significant digits; bit-exact round
// trip).
//
// # Safety
// `path` must be a NUL-terminated string.
enum TcosepStatus tcosep_tensor_write_t3t(const struct TcosepTensor *t, const char *path);

// Tensor t-product `a * b`.
//
// # Safety
// Handles must be valid; `out` a valid slot.
enum TcosepStatus tcosep_tprod(const struct TcosepTensor *a,
                               const struct TcosepTensor *b,
                               struct TcosepTensor **out);

// Tensor transpose.
//
// # Safety
// `t` must be valid; `out` a valid slot.
enum TcosepStatus tcosep_transpose(const struct TcosepTensor *t, struct TcosepTensor **out);

// Frobenius norm of `t`.
//
// # Safety
// Pointers must be valid.
enum TcosepStatus tcosep_fro_norm(const struct TcosepTensor *t, double *out);

// `‖a − b‖_F / ‖a‖_F`.
//
// # Safety
// Pointers must be valid.
enum TcosepStatus tcosep_rel_error(const struct TcosepTensor *a,
                                   const struct TcosepTensor *b,
                                   double *out);

// t-SVD `t = W * Σ * Vᵀ`; the three factors come back as new handles.
//
// # Safety
// Pointers must be valid output slots.
enum TcosepStatus tcosep_tsvd(const struct TcosepTensor *t,
                              struct TcosepTensor **w,
                              struct TcosepTensor **sigma,
                              struct TcosepTensor **v);

// Multirank (one entry per frontal slice, buffer length `p`),
// tubalrank and stable rank at relative tolerance `rank_tol`.
//
// # Safety
// `multirank` must hold `p` writable entries.
enum TcosepStatus tcosep_ranks(const struct TcosepTensor *t,
                               double rank_tol,
                               uintptr_t *multirank,
                               uintptr_t multirank_len,
                               uintptr_t *tubalrank,
                               double *stable_rank);

// Alternating coseparable index selection; writes `r1` horizontal and
// `r2` lateral 0-based indices.
//
// # Safety
// `i_out` / `j_out` must hold `r1` / `r2` writable entries.
enum TcosepStatus tcosep_cosntf_select(const struct TcosepTensor *t,
                                       uintptr_t r1,
                                       uintptr_t r2,
                                       double delta,
                                       uintptr_t max_outer,
                                       double lambda,
                                       uintptr_t *i_out,
                                       uintptr_t *j_out,
                                       uintptr_t *outer_iterations,
                                       bool *converged);

// Randomized t-CUR-DEIM index selection.
//
// # Safety
// `i_out` / `j_out` must hold `r1` / `r2` writable entries.
enum TcosepStatus tcosep_tcur_deim_select(const struct TcosepTensor *t,
                                          uintptr_t r1,
                                          uintptr_t r2,
                                          uint64_t seed,
                                          enum TcosepDist dist,
                                          enum TcosepPairing pairing,
                                          uintptr_t *i_out,
                                          uintptr_t *j_out);

// Hybrid selection: uniform pre-sampling, then the alternating
// selector on the subtensor.
//
// # Safety
// `i_out` / `j_out` must hold `r1` / `r2` writable entries.
enum TcosepStatus tcosep_hybrid_select(const struct TcosepTensor *t,
                                       uintptr_t r1,
                                       uintptr_t r2,
                                       uint64_t seed,
                                       double delta,
                                       uintptr_t max_outer,
                                       double lambda,
                                       uintptr_t *i_out,
                                       uintptr_t *j_out);

// Recovers nonnegative factors for the core at the given 0-based
// index sets and returns an opaque model.
//
// # Safety
// `i`/`j` must hold `i_len`/`j_len` readable entries; `out` is a
// valid slot.
enum TcosepStatus tcosep_recover_factors(const struct TcosepTensor *t,
                                         const uintptr_t *i,
                                         uintptr_t i_len,
                                         const uintptr_t *j,
                                         uintptr_t j_len,
                                         uintptr_t max_iter,
                                         double delta,
                                         struct TcosepModel **out);

// Frees a model handle; a null pointer is ignored.
//
// # Safety
// `model` must be a handle from `tcosep_recover_factors`.
void tcosep_model_free(struct TcosepModel *model);

// Copies out one factor of the model: 0 = P1, 1 = core, 2 = P2.
//
// # Safety
// `out` must be a valid slot.
enum TcosepStatus tcosep_model_factor(const struct TcosepModel *model,
                                      uint32_t which,
                                      struct TcosepTensor **out);

// Reconstructs `P1 * core * P2`.
//
// # Safety
// `out` must be a valid slot.
enum TcosepStatus tcosep_model_reconstruct(const struct TcosepModel *model,
                                           struct TcosepTensor **out);

// Generates a synthetic coseparable tensor; writes the ground-truth
// index sets (0-based) into buffers of length `r1` and `r2`.
//
// # Safety
// Buffers and the output slot must be valid.
enum TcosepStatus tcosep_gen_synthetic(uintptr_t m,
                                       uintptr_t n,
                                       uintptr_t p,
                                       uintptr_t r1,
                                       uintptr_t r2,
                                       double noise,
                                       double slice_sum,
                                       uint64_t seed,
                                       struct TcosepTensor **out,
                                       uintptr_t *i_out,
                                       uintptr_t *j_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
