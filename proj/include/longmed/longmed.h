#ifndef LONGMED_H
#define LONGMED_H

/*
 * C interface to the bilinear-spline growth mediation library.  All model
 * state lives behind opaque handles; every entry point reports failure
 * through an lm_status code, with a human-readable message available from
 * lm_last_error() on the same thread.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; the bundled CLI uses them as process exit codes. */
typedef enum lm_status {
  LM_OK = 0,
  LM_E_VALIDATION = 2,  /* bad config, flags, or data */
  LM_E_NO_CONVERGE = 3, /* fit exhausted its restart budget */
  LM_E_PARTIAL_MC = 4,  /* a Monte Carlo condition fell short of its reps */
  LM_E_IO = 5,          /* unreadable input or unwritable output */
  LM_E_INTERNAL = 6
} lm_status;

#define LM_MODEL_1 1 /* baseline covariate -> mediator -> outcome */
#define LM_MODEL_2 2 /* three longitudinal processes */

typedef struct lm_dataset lm_dataset;
typedef struct lm_fit_result lm_fit_result;

/* ---- datasets -------------------------------------------------------- */

/* Reads a wide-format CSV; the model kind is inferred from the header. */
lm_status lm_dataset_read_csv(const char* path, lm_dataset** out);
int lm_dataset_rows(const lm_dataset* d);
int lm_dataset_occasions(const lm_dataset* d);
int lm_dataset_model(const lm_dataset* d); /* LM_MODEL_1 or LM_MODEL_2 */
void lm_dataset_free(lm_dataset* d);

/* ---- fitting ---------------------------------------------------------- */

typedef struct lm_fit_options {
  int max_starts;   /* jittered restart budget (default 10) */
  double grad_tol;  /* gradient infinity-norm tolerance (default 1e-5) */
  int max_iter;     /* iteration cap per start (default 500) */
  uint64_t seed;    /* drives restart jitter (default 1) */
} lm_fit_options;

void lm_fit_options_init(lm_fit_options* opt);

/*
 * Fits `model` (LM_MODEL_1/LM_MODEL_2) to `data`.  On LM_OK the handle is
 * written to *out.  A fit that exhausts its restarts returns
 * LM_E_NO_CONVERGE and STILL writes a result handle carrying the best point
 * and diagnostics; the caller frees it either way.  `opt` may be NULL for
 * defaults.
 */
lm_status lm_fit(const lm_dataset* data, int model, const lm_fit_options* opt,
                 lm_fit_result** out);

int lm_fit_converged(const lm_fit_result* r);
double lm_fit_loglik(const lm_fit_result* r);
int lm_fit_param_count(const lm_fit_result* r);
const char* lm_fit_param_name(const lm_fit_result* r, int i);
double lm_fit_param_est(const lm_fit_result* r, int i);
double lm_fit_param_se(const lm_fit_result* r, int i); /* NaN if unavailable */
int lm_fit_effect_count(const lm_fit_result* r);
const char* lm_fit_effect_label(const lm_fit_result* r, int i);
const char* lm_fit_effect_kind(const lm_fit_result* r, int i); /* direct/indirect/total */
double lm_fit_effect_est(const lm_fit_result* r, int i);
double lm_fit_effect_se(const lm_fit_result* r, int i); /* NaN if unavailable */

/* Full JSON report; release with lm_string_free.  NULL on allocation
 * failure.  `data_path` is echoed into the report's data field. */
char* lm_fit_report_json(const lm_fit_result* r, const char* data_path,
                         uint64_t seed);

void lm_fit_result_free(lm_fit_result* r);

/* ---- commands ---------------------------------------------------------- */

/* Flag overrides applied on top of a JSON config file. */
typedef struct lm_cmd_overrides {
  int has_model;
  int model;
  int has_seed;
  uint64_t seed;
  const char* out;  /* NULL = keep config value */
  int univariate;   /* fit only */
  int has_reps;     /* mc only */
  int reps;
} lm_cmd_overrides;

void lm_cmd_overrides_init(lm_cmd_overrides* ov);

/* Each command loads the config, runs, and writes its report files.  `ov`
 * may be NULL.  The returned status is the intended process exit code. */
lm_status lm_cmd_fit(const char* config_path, const lm_cmd_overrides* ov);
lm_status lm_cmd_simulate(const char* config_path, const lm_cmd_overrides* ov);
lm_status lm_cmd_mc(const char* config_path, const lm_cmd_overrides* ov);

/* Message behind the most recent failure on this thread; "" when none.
 * The pointer stays valid until the next library call on the thread. */
const char* lm_last_error(void);

void lm_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* LONGMED_H */
