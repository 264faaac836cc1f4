#ifndef BFP_CAPI_H
#define BFP_CAPI_H

/* Generated by cbindgen from the bfp-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible C-ABI call.
typedef enum BfpStatus {
  BFP_STATUS_OK = 0,
  BFP_STATUS_NULL_ARGUMENT = 1,
  BFP_STATUS_INVALID_UTF8 = 2,
  BFP_STATUS_CONFIG_ERROR = 3,
  BFP_STATUS_SOLVE_ERROR = 4,
  BFP_STATUS_BUFFER_TOO_SMALL = 5,
} BfpStatus;

// Iterative method selector for `bfp_solve`.
typedef enum BfpMethod {
  BFP_METHOD_SI = 0,
  BFP_METHOD_NDA = 1,
} BfpMethod;

// Opaque parsed problem (configuration text plus defaults).
typedef struct BfpProblem BfpProblem;

// Opaque solve report.
typedef struct BfpReport BfpReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *bfp_last_error_message(void);

// Parse a configuration and allocate a problem handle into `out_problem`.
// The text uses the CLI's key=value format; harness-only keys (label,
// output paths, emit flags) are accepted and ignored here.
//
// # Safety
// `config_text` must be a valid NUL-terminated C string and `out_problem`
// a valid pointer.
enum BfpStatus bfp_problem_parse(const char *config_text, struct BfpProblem **out_problem);

// Release a problem handle. Null is a no-op.
//
// # Safety
// `problem` must be a pointer returned by `bfp_problem_parse` (or null)
// that has not already been freed.
void bfp_problem_free(struct BfpProblem *problem);

// Number of spatial nodes (cells) of the problem, 0 on null.
//
// # Safety
// `problem` must be a live handle or null.
size_t bfp_problem_cells(const struct BfpProblem *problem);

// Run the selected iterative method and allocate a report handle.
//
// # Safety
// `problem` must be a live handle and `out_report` a valid pointer.
enum BfpStatus bfp_solve(const struct BfpProblem *problem,
                         enum BfpMethod method,
                         struct BfpReport **out_report);

// Direct dense reference solve; copies the per-node scalar flux into
// `buffer` (length must be at least the cell count).
//
// # Safety
// `problem` must be a live handle; `buffer` must point to `len` doubles.
enum BfpStatus bfp_oracle_flux(const struct BfpProblem *problem, double *buffer, size_t len);

// Release a report handle. Null is a no-op.
//
// # Safety
// `report` must be a pointer returned by `bfp_solve` (or null) that has
// not already been freed.
void bfp_report_free(struct BfpReport *report);

// Iteration count at termination (0 on null).
//
// # Safety
// `report` must be a live handle or null.
size_t bfp_report_iterations(const struct BfpReport *report);

// Whether the run met its tolerance.
//
// # Safety
// `report` must be a live handle or null.
bool bfp_report_converged(const struct BfpReport *report);

// Wall time of the iteration loop in seconds.
//
// # Safety
// `report` must be a live handle or null.
double bfp_report_wall_seconds(const struct BfpReport *report);

// Number of per-node flux values.
//
// # Safety
// `report` must be a live handle or null.
size_t bfp_report_num_nodes(const struct BfpReport *report);

// Number of entries in the error history (= iterations).
//
// # Safety
// `report` must be a live handle or null.
size_t bfp_report_history_len(const struct BfpReport *report);

// Copy the converged scalar flux (one value per node) into `buffer`.
//
// # Safety
// `report` must be a live handle; `buffer` must point to `len` doubles.
enum BfpStatus bfp_report_copy_flux(const struct BfpReport *report, double *buffer, size_t len);

// Copy the edge currents (nodes + 1 values) into `buffer`.
//
// # Safety
// `report` must be a live handle; `buffer` must point to `len` doubles.
enum BfpStatus bfp_report_copy_edge_currents(const struct BfpReport *report,
                                             double *buffer,
                                             size_t len);

// Copy the per-iteration error history into `buffer`.
//
// # Safety
// `report` must be a live handle; `buffer` must point to `len` doubles.
enum BfpStatus bfp_report_copy_history(const struct BfpReport *report, double *buffer, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BFP_CAPI_H */
