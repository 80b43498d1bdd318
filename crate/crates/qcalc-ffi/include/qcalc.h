#ifndef QCALC_H
#define QCALC_H

/* Generated by the qcalc-ffi build script; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call across the boundary.
 */
typedef enum QcalcStatus {
  /**
   * The operation ran and every check passed.
   */
  QCALC_STATUS_OK = 0,
  /**
   * The operation ran but at least one check failed; the report is
   * still produced.
   */
  QCALC_STATUS_CHECK_FAILED = 1,
  /**
   * A parameter was out of range or a required pointer was null.
   */
  QCALC_STATUS_INVALID_ARG = 2,
  /**
   * A config string could not be parsed.
   */
  QCALC_STATUS_PARSE_ERROR = 3,
  /**
   * The engine panicked; no output was produced.
   */
  QCALC_STATUS_PANIC = 4,
} QcalcStatus;

/**
 * Opaque verification report.
 */
typedef struct QcalcReport QcalcReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Verify d^N f = 0 for `trials` seeded random polynomials in `n_vars`
 * variables. `*out` receives a report handle on success.
 */
enum QcalcStatus qcalc_verify_nilpotency(uint32_t n_order,
                                         uint32_t n_vars,
                                         uint32_t trials,
                                         uint64_t seed,
                                         struct QcalcReport **out);

/**
 * Verify that every homogeneous condition polynomial of the order-N
 * algebra reduces to zero under the cyclic relations.
 */
enum QcalcStatus qcalc_verify_conditions(uint32_t n_order,
                                         uint32_t n_vars,
                                         struct QcalcReport **out);

/**
 * Basis dimension of the order-3 differential module over `n_vars`
 * variables; pure formula, never fails.
 */
uint64_t qcalc_module_dimension(uint64_t n_vars);

/**
 * Run the Clifford suite (generator relations, matrix representation,
 * nilpotency of the q-differentials, operator anticommutators) for
 * C_{p,N}.
 */
enum QcalcStatus qcalc_clifford_verify(uint32_t p, uint32_t n_order, struct QcalcReport **out);

/**
 * Arclength of a curve in a polynomial metric. `config_json` is the JSON
 * form of the length config (metric, curve, from, to, optional tol); the
 * result lands in `*out_length`.
 */
enum QcalcStatus qcalc_curve_length(const char *config_json, double *out_length);

/**
 * JSON rendering of a report; free with [`qcalc_string_free`]. Null in,
 * null out.
 */
char *qcalc_report_json(const struct QcalcReport *report);

/**
 * 1 if every check in the report passed, 0 if any failed, -1 on null.
 */
int qcalc_report_passed(const struct QcalcReport *report);

/**
 * Release a report handle. Null is ignored.
 *
 * # Safety
 * `report` must have been produced by one of the verify functions and not
 * freed before.
 */
void qcalc_report_free(struct QcalcReport *report);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must have been returned by [`qcalc_report_json`] or
 * [`qcalc_version`] and not freed before.
 */
void qcalc_string_free(char *s);

/**
 * Library version as a heap string; free with [`qcalc_string_free`].
 */
char *qcalc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCALC_H */
