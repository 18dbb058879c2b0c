#ifndef MCC_INFER_H
#define MCC_INFER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MccStatus {
  MCC_STATUS_OK = 0,
  // A required pointer argument was NULL.
  MCC_STATUS_NULL_POINTER = 1,
  MCC_STATUS_INVALID_ARGUMENT = 2,
  // The MCC (or its variance) is undefined for the given table.
  MCC_STATUS_UNDEFINED = 3,
  // No probability table satisfies the requested scenario.
  MCC_STATUS_INFEASIBLE = 4,
  // Index past the end of a handle's rows.
  MCC_STATUS_OUT_OF_RANGE = 5,
  // A caller-supplied buffer is too small.
  MCC_STATUS_BUFFER_TOO_SMALL = 6,
  // Internal panic; the handle arguments are left untouched.
  MCC_STATUS_INTERNAL = 7,
} MccStatus;

typedef enum MccMethod {
  MCC_METHOD_SIMPLE_SINGLE = 0,
  MCC_METHOD_FISHER_Z = 1,
  MCC_METHOD_FISHER_Z_NAIVE = 2,
  MCC_METHOD_SIMPLE_PAIRED = 3,
  MCC_METHOD_ZOU = 4,
  MCC_METHOD_MT = 5,
} MccMethod;

typedef enum MccNa {
  MCC_NA_NONE = 0,
  MCC_NA_UNDEFINED_MCC = 1,
  MCC_NA_TRANSFORM_BOUNDARY = 2,
} MccNa;

typedef struct MccCoverageReport MccCoverageReport;

typedef struct MccScenario MccScenario;

typedef struct MccSweep MccSweep;

// Interval limits are NaN when `na` is not `MCC_NA_NONE`.
typedef struct MccInterval {
  enum MccMethod method;
  double estimate;
  double lower;
  double upper;
  double level;
  enum MccNa na;
} MccInterval;

typedef struct MccMethodCoverage {
  enum MccMethod method;
  double coverage;
  double mc_stderr;
  uint64_t hits;
  uint64_t evaluated;
  uint64_t na_undefined;
  uint64_t na_boundary;
} MccMethodCoverage;

typedef struct MccSummary {
  double sensitivity;
  double specificity;
  double prevalence;
} MccSummary;

typedef struct MccSweepRow {
  double p001;
  double p110;
  double estimate;
  double lower;
  double upper;
  bool feasible;
  bool na;
} MccSweepRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL after a
// success. Valid until the next call into this library on the same thread.
const char *mcc_last_error_message(void);

// Static, NUL-terminated version string.
const char *mcc_version(void);

// MCC of a probability table `(p11, p10, p01, p00)`.
//
// # Safety
// `p` must point to 4 doubles and `out_value` to one writable double.
enum MccStatus mcc_phi(const double *p, double *out_value);

// Difference MCC1 - MCC2 of an 8-cell joint table
// `(p111, p110, p101, p100, p011, p010, p001, p000)`.
//
// # Safety
// `p` must point to 8 doubles and `out_value` to one writable double.
enum MccStatus mcc_psi(const double *p, double *out_value);

// Interval for one MCC from counts `(TP, FP, FN, TN)`. An NA interval is
// still `MCC_STATUS_OK`; inspect `out_interval->na`. `method` is an
// `MccMethod` value from the single family.
//
// # Safety
// `counts` must point to 4 integers and `out_interval` to a writable `MccInterval`.
enum MccStatus mcc_ci_single(const uint64_t *counts,
                             double level,
                             int32_t method,
                             struct MccInterval *out_interval);

// Interval for MCC1 - MCC2 from the 8 paired counts in cell order
// `(n111, n110, n101, n100, n011, n010, n001, n000)`; the digits are
// (classifier 1, classifier 2, truth). `method` is a paired `MccMethod`.
//
// # Safety
// `counts` must point to 8 integers and `out_interval` to a writable `MccInterval`.
enum MccStatus mcc_ci_paired(const uint64_t *counts,
                             double level,
                             int32_t method,
                             struct MccInterval *out_interval);

// # Safety
// The out-parameter must be a writable pointer slot.
enum MccStatus mcc_scenario_single_new(double prevalence,
                                       double mcc,
                                       struct MccScenario **out_scenario);

// Paired scenario with fixed joint cells `p001` and `p110`.
//
// # Safety
// The out-parameter must be a writable pointer slot.
enum MccStatus mcc_scenario_paired_new(double prevalence,
                                       double mcc1,
                                       double mcc2,
                                       double p001,
                                       double p110,
                                       struct MccScenario **out_scenario);

// Parse the key-value scenario format written by `mcc-infer scenario`.
//
// # Safety
// `text` must be a NUL-terminated string; the out-parameter a writable pointer slot.
enum MccStatus mcc_scenario_parse(const char *text, struct MccScenario **out_scenario);

// Copies the scenario's probability cells (4 or 8) into `buf`.
// `out_len` receives the number of cells even when `buf` is too small.
//
// # Safety
// `buf` must have room for `cap` doubles.
enum MccStatus mcc_scenario_cells(const struct MccScenario *scenario,
                                  double *buf,
                                  size_t cap,
                                  size_t *out_len);

// True parameter: the MCC, or MCC1 - MCC2 for paired scenarios.
//
// # Safety
// Pointers must be valid.
enum MccStatus mcc_scenario_true_value(const struct MccScenario *scenario, double *out_value);

// # Safety
// `scenario` must be NULL or a handle from this library, not yet freed.
bool mcc_scenario_is_paired(const struct MccScenario *scenario);

// # Safety
// `scenario` must be NULL or a handle from this library, not yet freed.
void mcc_scenario_free(struct MccScenario *scenario);

// Monte Carlo coverage with every method of the scenario's family.
// `workers == 0` uses one thread per core; results do not depend on it.
//
// # Safety
// `scenario` must be a live handle; the out-parameter a writable pointer slot.
enum MccStatus mcc_coverage_run(const struct MccScenario *scenario,
                                uint64_t n,
                                uint64_t m,
                                double level,
                                uint64_t seed,
                                size_t workers,
                                struct MccCoverageReport **out_report);

// Number of methods in the report; 0 for NULL.
//
// # Safety
// `report` must be NULL or a live handle.
size_t mcc_coverage_len(const struct MccCoverageReport *report);

// # Safety
// `report` must be a live handle; `out_row` writable.
enum MccStatus mcc_coverage_get(const struct MccCoverageReport *report,
                                size_t index,
                                struct MccMethodCoverage *out_row);

// # Safety
// `report` must be NULL or a handle from this library, not yet freed.
void mcc_coverage_free(struct MccCoverageReport *report);

// Sweep `(p001, p110)` over the admissible box of two published summaries.
//
// # Safety
// Summary pointers must be valid; the out-parameter a writable pointer slot.
enum MccStatus mcc_sweep_run(const struct MccSummary *a,
                             const struct MccSummary *b,
                             uint64_t n,
                             double level,
                             double p001_step,
                             double p110_step,
                             int32_t method,
                             struct MccSweep **out_sweep);

// # Safety
// `sweep` must be NULL or a live handle.
size_t mcc_sweep_len(const struct MccSweep *sweep);

// # Safety
// `sweep` must be a live handle; `out_row` writable.
enum MccStatus mcc_sweep_get(const struct MccSweep *sweep,
                             size_t index,
                             struct MccSweepRow *out_row);

// # Safety
// `sweep` must be NULL or a handle from this library, not yet freed.
void mcc_sweep_free(struct MccSweep *sweep);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCC_INFER_H */
