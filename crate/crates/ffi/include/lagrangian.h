#ifndef LAGRANGIAN_H
#define LAGRANGIAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LgStatus {
  LG_STATUS_OK = 0,
  LG_STATUS_NULL_POINTER = 1,
  LG_STATUS_INVALID_INPUT = 2,
  LG_STATUS_PARSE_ERROR = 3,
  LG_STATUS_DOMAIN_ERROR = 4,
  LG_STATUS_DEGENERATE = 5,
  LG_STATUS_BUFFER_TOO_SMALL = 6,
  LG_STATUS_PANIC = 7,
} LgStatus;

// Opaque Lagrangian handle.
typedef struct LgField LgField;

// Outcome of `lg_flow`.
typedef struct LgFlowSummary {
  size_t samples;
  double t_final;
  double lagrangian_drift;
  double energy_relative_drift;
  bool truncated;
} LgFlowSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. The pointer stays
// valid until the next call into this library on the same thread.
const char *lg_last_error_message(void);

// Parses `text` as a Lagrangian over `x1..xdim, y1..ydim`.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum LgStatus lg_field_from_expression(const char *text, size_t dim, struct LgField **out);

// Builds a named family (`flat-quadratic-phi`, `polar-linear-phi`,
// `null-control`, `homogeneous-control`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum LgStatus lg_field_from_family(const char *name, struct LgField **out);

// # Safety
// `field` must come from this library and not be freed twice. NULL is
// ignored.
void lg_field_free(struct LgField *field);

// Dimension of the base manifold, or 0 for NULL.
//
// # Safety
// `field` must be NULL or a live handle.
size_t lg_field_dim(const struct LgField *field);

// `g_ij`, n×n row-major.
//
// # Safety
// `x`, `y` hold `dim` doubles; `out` holds `len` doubles.
enum LgStatus lg_metric(const struct LgField *field,
                        const double *x,
                        const double *y,
                        double *out,
                        size_t len);

// `G^i`, n values.
//
// # Safety
// As for `lg_metric`.
enum LgStatus lg_semispray(const struct LgField *field,
                           const double *x,
                           const double *y,
                           double *out,
                           size_t len);

// `N^i_j`, n×n row-major.
//
// # Safety
// As for `lg_metric`.
enum LgStatus lg_connection(const struct LgField *field,
                            const double *x,
                            const double *y,
                            double *out,
                            size_t len);

// `ω_L(e_a, e_b)` over the natural basis `(∂/∂x, ∂/∂y)`, 2n×2n row-major.
//
// # Safety
// As for `lg_metric`.
enum LgStatus lg_two_form(const struct LgField *field,
                          const double *x,
                          const double *y,
                          double *out,
                          size_t len);

// `L_{|i}`, n values.
//
// # Safety
// As for `lg_metric`.
enum LgStatus lg_horizontal_differential(const struct LgField *field,
                                         const double *x,
                                         const double *y,
                                         double *out,
                                         size_t len);

// Writes `L`, `E_L` and `S(L)` (3 values).
//
// # Safety
// As for `lg_metric`.
enum LgStatus lg_scalars(const struct LgField *field,
                         const double *x,
                         const double *y,
                         double *out,
                         size_t len);

// Runs the identity suite at `samples` points drawn with `seed`;
// `*passed` is true when every non-skipped check passes.
//
// # Safety
// `field` must be a live handle; `passed` must be writable.
enum LgStatus lg_verify(const struct LgField *field,
                        size_t samples,
                        uint64_t seed,
                        double tol,
                        bool *passed);

// Integrates the semispray (`horizontal == false`) or horizontal flow from
// `(x, y)` and writes the final state `(x, y)` into `state` (2n values).
//
// # Safety
// `x`, `y` hold `dim` doubles; `state` holds `len` doubles; `summary` must
// be writable.
enum LgStatus lg_flow(const struct LgField *field,
                      const double *x,
                      const double *y,
                      double step,
                      double t_end,
                      bool horizontal,
                      double *state,
                      size_t len,
                      struct LgFlowSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAGRANGIAN_H */
