/* lqsep — blind separation of linear-quadratic two-source mixtures.
 *
 * C interface to the shared library. All entry points return an lq_status;
 * results come back through out-parameters. Handle types (lq_rng,
 * lq_train_report, lq_gradcheck_result, lq_kernel_score) are opaque and must
 * be released with their matching *_free function. On any non-zero status,
 * lq_last_error_message() returns a thread-local description of the failure.
 *
 * Mixing model, params in canonical order [l1, l2, q1, q2]:
 *   x1 = s1 - l1*s2 - q1*s1*s2
 *   x2 = s2 - l2*s1 - q2*s1*s2
 */
#ifndef LQSEP_LQSEP_H
#define LQSEP_LQSEP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lq_status {
  LQ_OK = 0,
  LQ_ERR_INVALID_ARGUMENT = 1,
  LQ_ERR_DEGENERATE = 2,
  LQ_ERR_NEGATIVE_DISCRIMINANT = 3,
  LQ_ERR_MIXED_SIGN = 4,
  LQ_ERR_SINGULAR_JACOBIAN = 5,
  LQ_ERR_TOO_FEW_SAMPLES = 6,
  LQ_ERR_ZERO_VARIANCE = 7,
  LQ_ERR_NO_REAL_ROOT = 8,
  LQ_ERR_BRANCH_CROSSING = 9,
  LQ_ERR_ALL_SAMPLES_FAILED = 10,
  LQ_ERR_NON_FINITE_DENSITY = 11,
  LQ_ERR_LENGTH_MISMATCH = 12,
  LQ_ERR_UNKNOWN = 99
} lq_status;

const char* lq_status_name(lq_status status);
const char* lq_last_error_message(void);
const char* lq_version(void);

/* ------------------------------------------------------------------ */
/* Plain value types                                                    */

typedef struct lq_params {
  double l1, l2, q1, q2;
} lq_params;

typedef struct lq_pair {
  double first, second;
} lq_pair;

typedef struct lq_raw_coefficients {
  double a11, a12, a21, a22, b1, b2;
} lq_raw_coefficients;

typedef struct lq_interval {
  double lo, hi;
} lq_interval;

typedef struct lq_mat2 {
  double a11, a12, a21, a22; /* row major */
} lq_mat2;

typedef struct lq_gaussian {
  double mean, stddev;
} lq_gaussian;

enum {
  LQ_SIGN_ALWAYS_NEGATIVE = 0,
  LQ_SIGN_ALWAYS_POSITIVE = 1,
  LQ_SIGN_MIXED = 2
};

enum { LQ_GRADIENT_CORRECTED = 0, LQ_GRADIENT_LEGACY = 1 };
enum { LQ_SCORES_ANALYTIC = 0, LQ_SCORES_KERNEL = 1 };
enum {
  LQ_RECURRENCE_CONVERGED = 0,
  LQ_RECURRENCE_MAX_ITERATIONS = 1,
  LQ_RECURRENCE_DIVERGED = 2
};
enum { LQ_TRAIN_CONVERGED = 0, LQ_TRAIN_MAX_EPOCHS = 1, LQ_TRAIN_DIVERGED = 2 };

/* ------------------------------------------------------------------ */
/* Mixture core                                                         */

typedef struct lq_inverse_candidates {
  lq_pair root_plus;  /* (-b + sqrt(delta)) / (2a) branch of both channels */
  lq_pair root_minus; /* (-b - sqrt(delta)) / (2a) branch */
  double delta1, delta2;
} lq_inverse_candidates;

lq_status lq_normalize_raw(lq_raw_coefficients raw, lq_params* out);
lq_status lq_mix(lq_params w, lq_pair s, lq_pair* out);
lq_status lq_jacobian(lq_params w, lq_pair s, double* out);
lq_status lq_mixing_jacobian_matrix(lq_params w, lq_pair s, lq_mat2* out);
lq_status lq_direct_inverse(lq_params w, lq_pair x, lq_inverse_candidates* out);
/* sign_class: LQ_SIGN_*; LQ_SIGN_MIXED is rejected. */
lq_status lq_select_root(const lq_inverse_candidates* candidates,
                         int sign_class, lq_pair* out);
lq_status lq_permuted_solution(lq_params w, lq_pair s, lq_pair* out);
lq_status lq_classify_sign(lq_params w, lq_interval s1_range,
                           lq_interval s2_range, int* out_sign_class);

/* ------------------------------------------------------------------ */
/* Recurrent separating network                                         */

typedef struct lq_recurrence_config {
  int max_iterations;
  double tolerance;
  double divergence_bound;
} lq_recurrence_config;

void lq_recurrence_config_init(lq_recurrence_config* cfg);

typedef struct lq_recurrence_result {
  lq_pair output;
  int status; /* LQ_RECURRENCE_* */
  int iterations;
} lq_recurrence_result;

typedef struct lq_stability_report {
  double magnitude1, magnitude2; /* eigenvalue magnitudes, ascending */
  int locally_stable;
} lq_stability_report;

lq_status lq_iterate_once(lq_params w, lq_pair x, lq_pair y, lq_pair* out);
lq_status lq_run_recurrence(lq_params w, lq_pair x, lq_pair y0,
                            const lq_recurrence_config* cfg,
                            lq_recurrence_result* out);
lq_status lq_recurrence_jacobian(lq_params w, lq_pair y, lq_mat2* out);
lq_status lq_stability_at(lq_params w, lq_pair s, lq_stability_report* out);

/* ------------------------------------------------------------------ */
/* Score functions                                                      */

typedef struct lq_kernel_score lq_kernel_score;

lq_status lq_gaussian_psi(lq_gaussian g, double u, double* out);
lq_status lq_gaussian_log_density(lq_gaussian g, double u, double* out);

/* bandwidth <= 0 selects Silverman's rule. */
lq_status lq_kernel_fit(const double* samples, size_t n, double bandwidth,
                        lq_kernel_score** out);
void lq_kernel_score_free(lq_kernel_score* model);
lq_status lq_kernel_psi(const lq_kernel_score* model, double u, double* out);
lq_status lq_kernel_density(const lq_kernel_score* model, double u,
                            double* out);
lq_status lq_kernel_log_density(const lq_kernel_score* model, double u,
                                double* out);
lq_status lq_kernel_bandwidth(const lq_kernel_score* model, double* out);
lq_status lq_kernel_support(const lq_kernel_score* model, lq_interval* out);

/* ------------------------------------------------------------------ */
/* Likelihood and analytic gradients                                    */

#define LQ_DEFAULT_JACOBIAN_FLOOR 1e-8

lq_status lq_dsdw(lq_params w, lq_pair s, double jacobian_floor,
                  double out_ds1_dw[4], double out_ds2_dw[4]);
lq_status lq_djdw_explicit(lq_params w, lq_pair s, double out[4]);
lq_status lq_djds(lq_params w, double out[2]);
lq_status lq_djdw_total(lq_params w, lq_pair s, double jacobian_floor,
                        double out[4]);

/* Batch log likelihood and gradient at recovered sources, Gaussian source
 * densities. variant: LQ_GRADIENT_*. Either out pointer may be NULL. */
lq_status lq_gradient_gaussian(lq_params w, const lq_pair* sources, size_t n,
                               lq_gaussian g1, lq_gaussian g2,
                               double jacobian_floor, int variant,
                               double out_gradient[4], double* out_loglik);

/* Same, with fitted kernel models as the source densities. */
lq_status lq_gradient_kernel(lq_params w, const lq_pair* sources, size_t n,
                             const lq_kernel_score* k1,
                             const lq_kernel_score* k2, double jacobian_floor,
                             int variant, double out_gradient[4],
                             double* out_loglik);

/* ------------------------------------------------------------------ */
/* Finite-difference oracle                                             */

typedef struct lq_fd_config {
  double step;
  double relative_tolerance;
} lq_fd_config;

void lq_fd_config_init(lq_fd_config* cfg);

/* count is 8 for dsdw reports (row1 then row2), 4 otherwise. */
typedef struct lq_derivative_report {
  double analytic[8];
  double numeric[8];
  size_t count;
  double max_relative_error;
  int pass;
} lq_derivative_report;

lq_status lq_invert_for_sources(lq_params w, lq_pair x, lq_pair hint,
                                lq_pair* out);
lq_status lq_fd_dsdw(lq_params w, lq_pair x, lq_pair hint,
                     const lq_fd_config* cfg, lq_derivative_report* out);
/* out_total checks dJ/dw along the solution branch; out_frozen compares the
 * same numbers against the frozen-sources form the legacy gradient uses. */
lq_status lq_fd_djdw(lq_params w, lq_pair x, lq_pair hint,
                     const lq_fd_config* cfg, lq_derivative_report* out_total,
                     lq_derivative_report* out_frozen);
lq_status lq_fd_gradient_gaussian(lq_params w, const lq_pair* x_batch,
                                  const lq_pair* hints, size_t n,
                                  lq_gaussian g1, lq_gaussian g2,
                                  const lq_fd_config* cfg,
                                  double jacobian_floor,
                                  lq_derivative_report* out_corrected,
                                  lq_derivative_report* out_legacy);

typedef struct lq_gradcheck_config {
  uint64_t seed;
  int cases;
  int batch_size;
  double step;
  double tolerance;
  int linear_only;
} lq_gradcheck_config;

void lq_gradcheck_config_init(lq_gradcheck_config* cfg);

typedef struct lq_gradcheck_result lq_gradcheck_result;

typedef struct lq_gradcheck_summary {
  int cases;
  int corrected_all_pass;
  int legacy_fails_where_expected;
  double legacy_gap_fraction;
  int reference_point_pass;
  int pass;
} lq_gradcheck_summary;

typedef struct lq_gradcheck_case {
  lq_params params;
  double dsdw_error;
  int dsdw_pass;
  double djdw_total_error;
  int djdw_total_pass;
  double djdw_frozen_error;
  int djdw_frozen_expected_fail;
  int djdw_frozen_failed;
  double grad_corrected_error;
  int grad_corrected_pass;
  double grad_legacy_error;
  int legacy_gap_expected;
  int legacy_gap_observed;
} lq_gradcheck_case;

lq_status lq_run_gradcheck(const lq_gradcheck_config* cfg,
                           lq_gradcheck_result** out);
void lq_gradcheck_result_free(lq_gradcheck_result* result);
lq_status lq_gradcheck_summary_get(const lq_gradcheck_result* result,
                                   lq_gradcheck_summary* out);
lq_status lq_gradcheck_case_get(const lq_gradcheck_result* result, size_t index,
                                lq_gradcheck_case* out);

/* ------------------------------------------------------------------ */
/* Batch separation                                                     */

typedef struct lq_reconstruct_stats {
  int converged;
  int max_iterations;
  int recovered;
  int dropped;
} lq_reconstruct_stats;

/* out_pairs and out_kept_indices must hold n entries; *out_kept_count
 * reports how many were filled. */
lq_status lq_reconstruct(lq_params w, const lq_pair* x_batch, size_t n,
                         const lq_recurrence_config* recurrence,
                         lq_pair* out_pairs, size_t* out_kept_indices,
                         size_t* out_kept_count, lq_reconstruct_stats* stats);

typedef struct lq_train_config {
  double learning_rate;
  int max_epochs;
  double gradient_tolerance;
  int gradient_variant; /* LQ_GRADIENT_* */
  int score_mode;       /* LQ_SCORES_* */
  lq_gaussian analytic1, analytic2;
  double kernel_bandwidth;
  int refit_every;
  lq_params initial_params;
  double jacobian_floor;
  lq_recurrence_config recurrence;
  int halve_on_decrease;
  uint64_t seed;
} lq_train_config;

void lq_train_config_init(lq_train_config* cfg);

typedef struct lq_train_report lq_train_report;

typedef struct lq_epoch_record {
  lq_params params;
  double log_likelihood;
  double grad_inf_norm;
  int excluded;
} lq_epoch_record;

lq_status lq_train(const lq_pair* x_batch, size_t n,
                   const lq_train_config* cfg, lq_train_report** out);
void lq_train_report_free(lq_train_report* report);
lq_status lq_train_report_final_params(const lq_train_report* report,
                                       lq_params* out);
lq_status lq_train_report_status(const lq_train_report* report, int* out);
lq_status lq_train_report_epochs(const lq_train_report* report, int* out);
lq_status lq_train_report_trajectory_size(const lq_train_report* report,
                                          size_t* out);
lq_status lq_train_report_epoch(const lq_train_report* report, size_t index,
                                lq_epoch_record* out);

typedef struct lq_separation_metrics {
  double sir1_db, sir2_db;
  int swapped;
} lq_separation_metrics;

lq_status lq_align_and_score(const lq_pair* outputs, const lq_pair* truth,
                             size_t n, lq_separation_metrics* out);

/* ------------------------------------------------------------------ */
/* Deterministic random number generation                               */

typedef struct lq_rng lq_rng;

lq_rng* lq_rng_create(uint64_t seed);
void lq_rng_free(lq_rng* rng);
uint64_t lq_rng_next(lq_rng* rng);
double lq_rng_uniform(lq_rng* rng, double lo, double hi);
double lq_rng_gaussian(lq_rng* rng, double mean, double stddev);
double lq_rng_laplace(lq_rng* rng, double mean, double scale);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LQSEP_LQSEP_H */
