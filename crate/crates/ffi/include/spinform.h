#ifndef SPINFORM_H
#define SPINFORM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Largest `n₊ + n₋` accepted for Clifford handles.
#define SPF_MAX_CLIFFORD_DIM 16

typedef enum SpfStatus {
  SPF_STATUS_OK = 0,
  SPF_STATUS_NULL_POINTER = 1,
  SPF_STATUS_INVALID_ARGUMENT = 2,
  SPF_STATUS_DIMENSION_MISMATCH = 3,
  SPF_STATUS_DOMAIN = 4,
  SPF_STATUS_PARSE = 5,
  SPF_STATUS_IO = 6,
  SPF_STATUS_BUFFER_TOO_SMALL = 7,
  SPF_STATUS_PANIC = 8,
} SpfStatus;

// Model families for [`spf_model_new`].
typedef enum SpfModelKind {
  SPF_MODEL_KIND_FLAT = 0,
  SPF_MODEL_KIND_SPHERE = 1,
  SPF_MODEL_KIND_HYPERBOLIC = 2,
} SpfModelKind;

// Clifford module of a signature.
typedef struct SpfClifford SpfClifford;

// A model geometry with its catalog of certified fields.
typedef struct SpfModel SpfModel;

// A finished run: verdict and JSON report.
typedef struct SpfReport SpfReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf`. The stored
// message is left unchanged, also when the buffer is too small.
//
// # Safety
// `buf` must hold `len` bytes or be null; `needed` must be valid or null.
enum SpfStatus spf_last_error(char *buf, size_t len, size_t *needed);

// Creates the Clifford module of signature `(n_plus, n_minus)`.
//
// # Safety
// `out` must be a valid pointer.
enum SpfStatus spf_clifford_new(size_t n_plus, size_t n_minus, struct SpfClifford **out);

// Releases a Clifford handle; null is ignored.
//
// # Safety
// `h` must come from [`spf_clifford_new`] and not be used afterwards.
void spf_clifford_free(struct SpfClifford *h);

// Writes the spinor dimension `2^⌊n/2⌋`.
//
// # Safety
// `h` and `out` must be valid pointers.
enum SpfStatus spf_clifford_spinor_dim(const struct SpfClifford *h, size_t *out);

// Writes the largest entry of `γ_iγ_j + γ_jγ_i + 2g_ij`.
//
// # Safety
// `h` and `out` must be valid pointers.
enum SpfStatus spf_clifford_anticommutator_residual(const struct SpfClifford *h, double *out);

// Applies `γ_k` to a spinor of `spinor_dim` complex entries.
//
// # Safety
// `input` and `output` must each hold `2 * len` doubles.
enum SpfStatus spf_clifford_apply_gamma(const struct SpfClifford *h,
                                        size_t k,
                                        const double *input,
                                        double *output,
                                        size_t len);

// Writes the rank of the twistor module of spinor-valued `p`-forms.
//
// # Safety
// `h` and `out` must be valid pointers.
enum SpfStatus spf_clifford_twistor_rank(const struct SpfClifford *h, size_t p, size_t *out);

// Writes `dim Σᵖ = C(n, p)·spinor_dim`.
//
// # Safety
// `out` must be a valid pointer.
enum SpfStatus spf_dim_sigma(size_t n, size_t p, size_t spinor_dim, size_t *out);

// Creates a model. `n_minus` is only used for flat models; `dim` is the
// total dimension.
//
// # Safety
// `out` must be a valid pointer.
enum SpfStatus spf_model_new(enum SpfModelKind kind,
                             size_t dim,
                             size_t n_minus,
                             struct SpfModel **out);

// Releases a model handle; null is ignored.
//
// # Safety
// `h` must come from [`spf_model_new`] and not be used afterwards.
void spf_model_free(struct SpfModel *h);

// Writes the number of catalog fields.
//
// # Safety
// `h` and `out` must be valid pointers.
enum SpfStatus spf_model_catalog_len(const struct SpfModel *h, size_t *out);

// Copies the label of catalog field `index`.
//
// # Safety
// `buf` must hold `len` bytes or be null; `needed` must be valid or null.
enum SpfStatus spf_model_catalog_label(const struct SpfModel *h,
                                       size_t index,
                                       char *buf,
                                       size_t len,
                                       size_t *needed);

// Writes the largest residual of catalog field `index` over its certified
// equations at chart point `x` (`len` = model dimension).
//
// # Safety
// `x` must hold `len` doubles and `out` must be valid.
enum SpfStatus spf_model_catalog_residual(const struct SpfModel *h,
                                          size_t index,
                                          const double *x,
                                          size_t len,
                                          double *out);

// Runs the identity suite for all signatures with `n ≤ n_max`.
//
// # Safety
// `out` must be a valid pointer.
enum SpfStatus spf_identities(size_t n_max, uint64_t seed, size_t samples, struct SpfReport **out);

// Runs `check-field` (`cone = 0`) or `cone-check` (`cone = 1`) on a scene
// given as JSON text. `samples = 0` uses the scene's value or the default.
//
// # Safety
// `scene_json` must be a NUL-terminated string and `out` a valid pointer.
enum SpfStatus spf_run_scene(const char *scene_json,
                             bool cone,
                             uint64_t seed,
                             size_t samples,
                             struct SpfReport **out);

// Releases a report; null is ignored.
//
// # Safety
// `h` must come from a report-producing function and not be used afterwards.
void spf_report_free(struct SpfReport *h);

// Writes whether every check of the report passed.
//
// # Safety
// `h` and `out` must be valid pointers.
enum SpfStatus spf_report_pass(const struct SpfReport *h, bool *out);

// Copies the JSON report.
//
// # Safety
// `buf` must hold `len` bytes or be null; `needed` must be valid or null.
enum SpfStatus spf_report_json(const struct SpfReport *h, char *buf, size_t len, size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINFORM_H */
