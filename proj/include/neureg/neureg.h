/* neureg - boundary-point regularity analysis for divergence-form elliptic
 * operators with a co-normal boundary condition.
 *
 * The library decides, from the coefficients and an optional boundary graph,
 * whether weak solutions are Lipschitz or differentiable at the origin by
 * integrating the reduced dynamical system of the coefficients, and verifies
 * the verdicts at desk scale against explicit 2D solutions.
 *
 * All state lives behind the opaque neureg_run handle.  Functions return
 * neureg_status; messages for the last failure are kept per handle (or
 * globally for creation failures).  Handles are not thread-safe; distinct
 * handles may be used concurrently.
 */
#ifndef NEUREG_H
#define NEUREG_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum neureg_status {
  NEUREG_OK = 0,
  NEUREG_ERR_ARGUMENT = 1,   /* bad parameters or unsupported dimensions */
  NEUREG_ERR_CONFIG = 2,     /* config parse/validation failure */
  NEUREG_ERR_EVALUATION = 3, /* an evaluator produced non-finite values */
  NEUREG_ERR_NUMERIC = 4,    /* integration/quadrature breakdown */
  NEUREG_ERR_HYPOTHESIS = 5, /* a certified property or precondition fails */
  NEUREG_ERR_IO = 6,
  NEUREG_ERR_INTERNAL = 7
} neureg_status;

typedef struct neureg_run neureg_run;

const char* neureg_version(void);

/* Parses and validates a JSON config (defaults resolved); the handle owns a
 * private copy.  On failure returns the status and sets neureg_last_error. */
neureg_status neureg_run_create(const char* config_json, neureg_run** out_run);
void neureg_run_destroy(neureg_run* run);

/* The effective config (defaults resolved) as JSON, owned by the handle. */
const char* neureg_run_config(const neureg_run* run);

/* command is one of "classify", "verify", "kernel-check", "sweep".
 * Artifacts (report.json plus CSV plot data) are written under the config's
 * output directory; the report is retained on the handle. */
neureg_status neureg_run_execute(neureg_run* run, const char* command);

/* Overrides the output directory before execution. */
neureg_status neureg_run_set_output_dir(neureg_run* run, const char* dir);

/* Report JSON of the last successful execute; NULL before that. */
const char* neureg_run_report(const neureg_run* run);

/* Scientific outcome of the last execute: 0 = success/consistent,
 * 2 = contradiction, 3 = inconclusive under decisive mode. */
int neureg_run_outcome(const neureg_run* run);

/* Message for the last failure on this handle ("" if none). */
const char* neureg_run_error(const neureg_run* run);

/* Message for the last creation failure ("" if none). */
const char* neureg_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* NEUREG_H */
