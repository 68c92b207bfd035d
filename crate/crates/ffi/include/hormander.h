#ifndef HORMANDER_H
#define HORMANDER_H

#include <stddef.h>
#include <stdint.h>

typedef enum HmStatus {
  HM_STATUS_OK = 0,
  // A check ran and failed.
  HM_STATUS_FAIL = 1,
  // Malformed configuration or input text.
  HM_STATUS_CONFIG = 2,
  // A check ran and could not decide.
  HM_STATUS_INCONCLUSIVE = 3,
  // Null pointer or out-of-range argument.
  HM_STATUS_INVALID_ARGUMENT = 4,
  // Numerical precondition or solver failure.
  HM_STATUS_NUMERICAL = 5,
  HM_STATUS_PANIC = 6,
} HmStatus;

typedef struct HmField HmField;

typedef struct HmReport HmReport;

typedef struct HmRoParam HmRoParam;

typedef struct HmSystem HmSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last error on this thread, or null. Valid until the next
// call into this library on the same thread.
const char *hm_last_error(void);

// Parse `power:S`, `powerlog:S,R` or `powersinlog:S,DELTA`.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum HmStatus hm_roparam_parse(const char *spec, struct HmRoParam **out);

// `φ(t)` for `t ≥ 1`.
//
// # Safety
// `param` must come from [`hm_roparam_parse`]; `out` must be writable.
enum HmStatus hm_roparam_eval(const struct HmRoParam *param, double t, double *out);

// # Safety
// `param` must come from [`hm_roparam_parse`] or be null.
void hm_roparam_free(struct HmRoParam *param);

// Build a system from its JSON description. DN numbers are computed when absent.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum HmStatus hm_system_from_json(const char *json, struct HmSystem **out);

// A built-in system by name (`cauchy-riemann`, `one-minus-laplacian`, ...).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum HmStatus hm_system_library(const char *name, uintptr_t dim, struct HmSystem **out);

// Number of equations `p`, or 0 for a null handle.
//
// # Safety
// `sys` must come from this library or be null.
uintptr_t hm_system_p(const struct HmSystem *sys);

// Copy the DN numbers into `l` and `m`, each of length `len == p`.
//
// # Safety
// `l` and `m` must point to `len` writable doubles.
enum HmStatus hm_system_dn(const struct HmSystem *sys, double *l, double *m, uintptr_t len);

// Ellipticity margin `c_hat` on the default sphere and x samples.
//
// # Safety
// `sys` must be valid; `out` may be null.
enum HmStatus hm_system_check_elliptic(const struct HmSystem *sys, struct HmReport **out);

// # Safety
// `sys` must come from this library or be null.
void hm_system_free(struct HmSystem *sys);

// Field from Fourier coefficients in FFT order, row-major per component,
// components back to back: `p * size^dim` entries in each of `re`, `im`.
//
// # Safety
// `re` and `im` must point to `p * size^dim` readable doubles.
enum HmStatus hm_field_from_coeffs(uintptr_t dim,
                                   uintptr_t size,
                                   uintptr_t p,
                                   const double *re,
                                   const double *im,
                                   struct HmField **out);

// Seeded random field with decaying complex Gaussian coefficients.
//
// # Safety
// `out` must be writable.
enum HmStatus hm_field_random(uintptr_t dim,
                              uintptr_t size,
                              uintptr_t p,
                              uint64_t seed,
                              struct HmField **out);

// `(Σ_k ‖u_k‖²_φ)^{1/2}` with the same parameter for every component.
//
// # Safety
// Handles must be valid; `out` must be writable.
enum HmStatus hm_field_hnorm(const struct HmField *field,
                             const struct HmRoParam *param,
                             double *out);

// Apply the system to a field.
//
// # Safety
// Handles must be valid; `out` must be writable.
enum HmStatus hm_system_apply(const struct HmSystem *sys,
                              const struct HmField *field,
                              struct HmField **out);

// # Safety
// `field` must come from this library or be null.
void hm_field_free(struct HmField *field);

// A priori estimate. The status reflects the verdict; the report is stored
// in `out` when it is non-null.
//
// # Safety
// Handles must be valid; `grids` must point to `n_grids` sizes.
enum HmStatus hm_apriori(const struct HmSystem *sys,
                         const struct HmRoParam *param,
                         double sigma,
                         const uintptr_t *grids,
                         uintptr_t n_grids,
                         uintptr_t trials,
                         uint64_t seed,
                         struct HmReport **out);

// Regularity lifting, global and localized; `project != 0` projects the data
// onto the range.
//
// # Safety
// Handles must be valid; `grids` must point to `n_grids` sizes.
enum HmStatus hm_regularity(const struct HmSystem *sys,
                            const struct HmRoParam *param,
                            const uintptr_t *grids,
                            uintptr_t n_grids,
                            int32_t project,
                            uint64_t seed,
                            struct HmReport **out);

// Fredholm analysis on one grid; kernel dimensions and index are stored in
// the report constants `dim_N`, `dim_Nplus`, `index`.
//
// # Safety
// Handles must be valid.
enum HmStatus hm_fredholm(const struct HmSystem *sys,
                          const struct HmRoParam *param,
                          uintptr_t size,
                          uintptr_t trials,
                          uint64_t seed,
                          struct HmReport **out);

// Run a command line as the `hormander` binary would (`argv[0]` is the
// program name). The exit code is returned; the JSON report text is stored
// in `json_out` when it is non-null and the command produced reports.
//
// # Safety
// `argv` must point to `argc` NUL-terminated strings.
int32_t hm_run(uintptr_t argc, const char *const *argv, char **json_out);

// Overall verdict of a report as a status (`Ok`, `Fail` or `Inconclusive`).
//
// # Safety
// `report` must be valid.
enum HmStatus hm_report_verdict(const struct HmReport *report);

// Named constant of a report.
//
// # Safety
// `report` and `name` must be valid; `out` must be writable.
enum HmStatus hm_report_constant(const struct HmReport *report, const char *name, double *out);

// JSON text of a report; release with [`hm_string_free`].
//
// # Safety
// `report` must be valid or null.
char *hm_report_json(const struct HmReport *report);

// # Safety
// `report` must come from this library or be null.
void hm_report_free(struct HmReport *report);

// # Safety
// `s` must come from this library or be null.
void hm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HORMANDER_H */
