#include "lqsep/lqsep.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <utility>

#include "lqsep/fdcheck.hpp"
#include "lqsep/mixture.hpp"
#include "lqsep/optimizer.hpp"
#include "lqsep/recurrent.hpp"
#include "lqsep/rng.hpp"
#include "lqsep/scores.hpp"
#include "lqsep/types.hpp"

namespace {

thread_local std::string g_last_error;

lq_status fail(lq_status code, const char* message) {
  g_last_error = message;
  return code;
}

lq_status translate(const lqsep::Error& e) {
  g_last_error = e.what();
  int code = static_cast<int>(e.code());
  if (code >= LQ_ERR_INVALID_ARGUMENT && code <= LQ_ERR_LENGTH_MISMATCH) {
    return static_cast<lq_status>(code);
  }
  return LQ_ERR_UNKNOWN;
}

template <typename F>
lq_status wrap(F&& f) noexcept {
  try {
    f();
    return LQ_OK;
  } catch (const lqsep::Error& e) {
    return translate(e);
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LQ_ERR_UNKNOWN;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LQ_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return LQ_ERR_UNKNOWN;
  }
}

lqsep::MixingParams to_cpp(lq_params w) { return {w.l1, w.l2, w.q1, w.q2}; }
lq_params to_c(const lqsep::MixingParams& w) {
  return {w.l1, w.l2, w.q1, w.q2};
}
lqsep::SamplePair to_cpp(lq_pair p) { return {p.first, p.second}; }
lq_pair to_c(const lqsep::SamplePair& p) { return {p.first, p.second}; }
lq_mat2 to_c(const lqsep::Mat2& m) { return {m.a11, m.a12, m.a21, m.a22}; }

lqsep::SignalBatch to_cpp_batch(const lq_pair* data, size_t n) {
  lqsep::SignalBatch batch(n);
  for (size_t i = 0; i < n; ++i) batch[i] = to_cpp(data[i]);
  return batch;
}

lqsep::RecurrenceConfig to_cpp(const lq_recurrence_config* cfg) {
  if (!cfg) return {};
  return {cfg->max_iterations, cfg->tolerance, cfg->divergence_bound};
}

lqsep::FdConfig to_cpp(const lq_fd_config* cfg) {
  if (!cfg) return {};
  return {cfg->step, cfg->relative_tolerance};
}

void fill_report(const lqsep::DerivativeReport& rep,
                 lq_derivative_report* out) {
  std::memset(out, 0, sizeof(*out));
  out->count = rep.analytic.size() > 8 ? 8 : rep.analytic.size();
  for (size_t i = 0; i < out->count; ++i) {
    out->analytic[i] = rep.analytic[i];
    out->numeric[i] = rep.numeric[i];
  }
  out->max_relative_error = rep.max_relative_error;
  out->pass = rep.pass ? 1 : 0;
}

lqsep::GaussianScore to_score(lq_gaussian g) {
  return lqsep::gaussian_score(g.mean, g.stddev);
}

lq_status gradient_common(lq_params w, const lq_pair* sources, size_t n,
                          lqsep::ScoreFn psi1, lqsep::ScoreFn psi2,
                          lqsep::LogDensityFn logf1, lqsep::LogDensityFn logf2,
                          double jacobian_floor, int variant,
                          double out_gradient[4], double* out_loglik) {
  if (!sources) return fail(LQ_ERR_INVALID_ARGUMENT, "null sources");
  if (variant != LQ_GRADIENT_CORRECTED && variant != LQ_GRADIENT_LEGACY) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "bad gradient variant");
  }
  return wrap([&] {
    lqsep::LikelihoodContext ctx(to_cpp(w), to_cpp_batch(sources, n),
                                 std::move(psi1), std::move(psi2),
                                 jacobian_floor);
    if (out_gradient) {
      lqsep::GradientVector g = lqsep::gradient(
          ctx, static_cast<lqsep::GradientVariant>(variant));
      for (int k = 0; k < 4; ++k) out_gradient[k] = g[k];
    }
    if (out_loglik) {
      *out_loglik = lqsep::log_likelihood(ctx, logf1, logf2);
    }
  });
}

}  // namespace

extern "C" {

struct lq_kernel_score {
  lqsep::KernelScoreModel model;
};

struct lq_gradcheck_result {
  lqsep::GradcheckResult result;
};

struct lq_train_report {
  lqsep::TrainReport report;
};

struct lq_rng {
  lqsep::Rng rng;
};

const char* lq_status_name(lq_status status) {
  switch (status) {
    case LQ_OK: return "ok";
    case LQ_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case LQ_ERR_DEGENERATE: return "degenerate_coefficients";
    case LQ_ERR_NEGATIVE_DISCRIMINANT: return "negative_discriminant";
    case LQ_ERR_MIXED_SIGN: return "mixed_sign";
    case LQ_ERR_SINGULAR_JACOBIAN: return "singular_jacobian";
    case LQ_ERR_TOO_FEW_SAMPLES: return "too_few_samples";
    case LQ_ERR_ZERO_VARIANCE: return "zero_variance";
    case LQ_ERR_NO_REAL_ROOT: return "no_real_root";
    case LQ_ERR_BRANCH_CROSSING: return "branch_crossing";
    case LQ_ERR_ALL_SAMPLES_FAILED: return "all_samples_failed";
    case LQ_ERR_NON_FINITE_DENSITY: return "non_finite_density";
    case LQ_ERR_LENGTH_MISMATCH: return "length_mismatch";
    case LQ_ERR_UNKNOWN: break;
  }
  return "unknown";
}

const char* lq_last_error_message(void) { return g_last_error.c_str(); }

const char* lq_version(void) { return "1.0.0"; }

/* ------------------------------------------------------------------ */

lq_status lq_normalize_raw(lq_raw_coefficients raw, lq_params* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    lqsep::RawCoefficients rc{raw.a11, raw.a12, raw.a21,
                              raw.a22, raw.b1,  raw.b2};
    *out = to_c(lqsep::normalize_raw(rc));
  });
}

lq_status lq_mix(lq_params w, lq_pair s, lq_pair* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] { *out = to_c(lqsep::mix(to_cpp(w), to_cpp(s))); });
}

lq_status lq_jacobian(lq_params w, lq_pair s, double* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] { *out = lqsep::jacobian(to_cpp(w), to_cpp(s)); });
}

lq_status lq_mixing_jacobian_matrix(lq_params w, lq_pair s, lq_mat2* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    *out = to_c(lqsep::mixing_jacobian_matrix(to_cpp(w), to_cpp(s)));
  });
}

lq_status lq_direct_inverse(lq_params w, lq_pair x,
                            lq_inverse_candidates* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    lqsep::InverseCandidates c = lqsep::direct_inverse(to_cpp(w), to_cpp(x));
    out->root_plus = to_c(c.root_plus);
    out->root_minus = to_c(c.root_minus);
    out->delta1 = c.delta1;
    out->delta2 = c.delta2;
  });
}

lq_status lq_select_root(const lq_inverse_candidates* candidates,
                         int sign_class, lq_pair* out) {
  if (!candidates || !out) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  }
  if (sign_class < LQ_SIGN_ALWAYS_NEGATIVE || sign_class > LQ_SIGN_MIXED) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "bad sign class");
  }
  return wrap([&] {
    lqsep::InverseCandidates c;
    c.root_plus = to_cpp(candidates->root_plus);
    c.root_minus = to_cpp(candidates->root_minus);
    c.delta1 = candidates->delta1;
    c.delta2 = candidates->delta2;
    *out = to_c(lqsep::select_root(
        c, static_cast<lqsep::JacobianSignClass>(sign_class)));
  });
}

lq_status lq_permuted_solution(lq_params w, lq_pair s, lq_pair* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    *out = to_c(lqsep::permuted_solution(to_cpp(w), to_cpp(s)));
  });
}

lq_status lq_classify_sign(lq_params w, lq_interval s1_range,
                           lq_interval s2_range, int* out_sign_class) {
  if (!out_sign_class) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    *out_sign_class = static_cast<int>(lqsep::classify_jacobian_sign(
        to_cpp(w), {s1_range.lo, s1_range.hi}, {s2_range.lo, s2_range.hi}));
  });
}

/* ------------------------------------------------------------------ */

void lq_recurrence_config_init(lq_recurrence_config* cfg) {
  if (!cfg) return;
  lqsep::RecurrenceConfig d;
  cfg->max_iterations = d.max_iterations;
  cfg->tolerance = d.tolerance;
  cfg->divergence_bound = d.divergence_bound;
}

lq_status lq_iterate_once(lq_params w, lq_pair x, lq_pair y, lq_pair* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    *out = to_c(lqsep::iterate_once(to_cpp(w), to_cpp(x), to_cpp(y)));
  });
}

lq_status lq_run_recurrence(lq_params w, lq_pair x, lq_pair y0,
                            const lq_recurrence_config* cfg,
                            lq_recurrence_result* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    lqsep::RecurrenceResult r =
        lqsep::run_recurrence(to_cpp(w), to_cpp(x), to_cpp(y0), to_cpp(cfg));
    out->output = to_c(r.output);
    out->status = static_cast<int>(r.status);
    out->iterations = r.iterations;
  });
}

lq_status lq_recurrence_jacobian(lq_params w, lq_pair y, lq_mat2* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    *out = to_c(lqsep::recurrence_jacobian(to_cpp(w), to_cpp(y)));
  });
}

lq_status lq_stability_at(lq_params w, lq_pair s, lq_stability_report* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    lqsep::StabilityReport r = lqsep::stability_at(to_cpp(w), to_cpp(s));
    out->magnitude1 = r.magnitude1;
    out->magnitude2 = r.magnitude2;
    out->locally_stable = r.locally_stable ? 1 : 0;
  });
}

/* ------------------------------------------------------------------ */

lq_status lq_gaussian_psi(lq_gaussian g, double u, double* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] { *out = to_score(g).psi(u); });
}

lq_status lq_gaussian_log_density(lq_gaussian g, double u, double* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] { *out = to_score(g).log_density(u); });
}

lq_status lq_kernel_fit(const double* samples, size_t n, double bandwidth,
                        lq_kernel_score** out) {
  if (!out || (!samples && n > 0)) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  }
  *out = nullptr;
  return wrap([&] {
    auto* handle = new lq_kernel_score{
        lqsep::fit_kernel_score({samples, n}, bandwidth)};
    *out = handle;
  });
}

void lq_kernel_score_free(lq_kernel_score* model) { delete model; }

lq_status lq_kernel_psi(const lq_kernel_score* model, double u, double* out) {
  if (!model || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  return wrap([&] { *out = model->model.psi(u); });
}

lq_status lq_kernel_density(const lq_kernel_score* model, double u,
                            double* out) {
  if (!model || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  return wrap([&] { *out = model->model.density(u); });
}

lq_status lq_kernel_log_density(const lq_kernel_score* model, double u,
                                double* out) {
  if (!model || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  return wrap([&] { *out = model->model.log_density(u); });
}

lq_status lq_kernel_bandwidth(const lq_kernel_score* model, double* out) {
  if (!model || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  *out = model->model.bandwidth();
  return LQ_OK;
}

lq_status lq_kernel_support(const lq_kernel_score* model, lq_interval* out) {
  if (!model || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  lqsep::Interval s = model->model.support();
  out->lo = s.lo;
  out->hi = s.hi;
  return LQ_OK;
}

/* ------------------------------------------------------------------ */

lq_status lq_dsdw(lq_params w, lq_pair s, double jacobian_floor,
                  double out_ds1_dw[4], double out_ds2_dw[4]) {
  if (!out_ds1_dw || !out_ds2_dw) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  }
  return wrap([&] {
    lqsep::SensitivityMatrix m =
        lqsep::dsdw(to_cpp(w), to_cpp(s), jacobian_floor);
    for (int k = 0; k < 4; ++k) {
      out_ds1_dw[k] = m.ds1_dw[k];
      out_ds2_dw[k] = m.ds2_dw[k];
    }
  });
}

lq_status lq_djdw_explicit(lq_params w, lq_pair s, double out[4]) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    lqsep::GradientVector g = lqsep::djdw_explicit(to_cpp(w), to_cpp(s));
    for (int k = 0; k < 4; ++k) out[k] = g[k];
  });
}

lq_status lq_djds(lq_params w, double out[2]) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    lqsep::Vec2 d = lqsep::djds(to_cpp(w));
    out[0] = d[0];
    out[1] = d[1];
  });
}

lq_status lq_djdw_total(lq_params w, lq_pair s, double jacobian_floor,
                        double out[4]) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    lqsep::GradientVector g =
        lqsep::djdw_total(to_cpp(w), to_cpp(s), jacobian_floor);
    for (int k = 0; k < 4; ++k) out[k] = g[k];
  });
}

lq_status lq_gradient_gaussian(lq_params w, const lq_pair* sources, size_t n,
                               lq_gaussian g1, lq_gaussian g2,
                               double jacobian_floor, int variant,
                               double out_gradient[4], double* out_loglik) {
  try {
    lqsep::GaussianScore s1 = to_score(g1), s2 = to_score(g2);
    return gradient_common(
        w, sources, n, [s1](double u) { return s1.psi(u); },
        [s2](double u) { return s2.psi(u); },
        [s1](double u) { return s1.log_density(u); },
        [s2](double u) { return s2.log_density(u); }, jacobian_floor, variant,
        out_gradient, out_loglik);
  } catch (const lqsep::Error& e) {
    return translate(e);
  }
}

lq_status lq_gradient_kernel(lq_params w, const lq_pair* sources, size_t n,
                             const lq_kernel_score* k1,
                             const lq_kernel_score* k2, double jacobian_floor,
                             int variant, double out_gradient[4],
                             double* out_loglik) {
  if (!k1 || !k2) return fail(LQ_ERR_INVALID_ARGUMENT, "null kernel model");
  return gradient_common(
      w, sources, n, [k1](double u) { return k1->model.psi(u); },
      [k2](double u) { return k2->model.psi(u); },
      [k1](double u) { return k1->model.log_density(u); },
      [k2](double u) { return k2->model.log_density(u); }, jacobian_floor,
      variant, out_gradient, out_loglik);
}

/* ------------------------------------------------------------------ */

void lq_fd_config_init(lq_fd_config* cfg) {
  if (!cfg) return;
  lqsep::FdConfig d;
  cfg->step = d.step;
  cfg->relative_tolerance = d.relative_tolerance;
}

lq_status lq_invert_for_sources(lq_params w, lq_pair x, lq_pair hint,
                                lq_pair* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    *out = to_c(lqsep::invert_for_sources(to_cpp(w), to_cpp(x), to_cpp(hint)));
  });
}

lq_status lq_fd_dsdw(lq_params w, lq_pair x, lq_pair hint,
                     const lq_fd_config* cfg, lq_derivative_report* out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  return wrap([&] {
    fill_report(lqsep::fd_dsdw(to_cpp(w), to_cpp(x), to_cpp(hint), to_cpp(cfg)),
                out);
  });
}

lq_status lq_fd_djdw(lq_params w, lq_pair x, lq_pair hint,
                     const lq_fd_config* cfg, lq_derivative_report* out_total,
                     lq_derivative_report* out_frozen) {
  if (!out_total || !out_frozen) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  }
  return wrap([&] {
    lqsep::DjdwReports r =
        lqsep::fd_djdw(to_cpp(w), to_cpp(x), to_cpp(hint), to_cpp(cfg));
    fill_report(r.total, out_total);
    fill_report(r.frozen_sources, out_frozen);
  });
}

lq_status lq_fd_gradient_gaussian(lq_params w, const lq_pair* x_batch,
                                  const lq_pair* hints, size_t n,
                                  lq_gaussian g1, lq_gaussian g2,
                                  const lq_fd_config* cfg,
                                  double jacobian_floor,
                                  lq_derivative_report* out_corrected,
                                  lq_derivative_report* out_legacy) {
  if (!x_batch || !hints || !out_corrected || !out_legacy) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  }
  return wrap([&] {
    lqsep::GaussianScore s1 = to_score(g1), s2 = to_score(g2);
    lqsep::GradientReports r = lqsep::fd_gradient(
        to_cpp(w), to_cpp_batch(x_batch, n), to_cpp_batch(hints, n),
        [s1](double u) { return s1.psi(u); },
        [s2](double u) { return s2.psi(u); },
        [s1](double u) { return s1.log_density(u); },
        [s2](double u) { return s2.log_density(u); }, to_cpp(cfg),
        jacobian_floor);
    fill_report(r.corrected, out_corrected);
    fill_report(r.legacy, out_legacy);
  });
}

void lq_gradcheck_config_init(lq_gradcheck_config* cfg) {
  if (!cfg) return;
  lqsep::GradcheckConfig d;
  cfg->seed = d.seed;
  cfg->cases = d.cases;
  cfg->batch_size = d.batch_size;
  cfg->step = d.step;
  cfg->tolerance = d.tolerance;
  cfg->linear_only = d.linear_only ? 1 : 0;
}

lq_status lq_run_gradcheck(const lq_gradcheck_config* cfg,
                           lq_gradcheck_result** out) {
  if (!out) return fail(LQ_ERR_INVALID_ARGUMENT, "null out pointer");
  *out = nullptr;
  return wrap([&] {
    lqsep::GradcheckConfig c;
    if (cfg) {
      c.seed = cfg->seed;
      c.cases = cfg->cases;
      c.batch_size = cfg->batch_size;
      c.step = cfg->step;
      c.tolerance = cfg->tolerance;
      c.linear_only = cfg->linear_only != 0;
    }
    *out = new lq_gradcheck_result{lqsep::run_gradcheck(c)};
  });
}

void lq_gradcheck_result_free(lq_gradcheck_result* result) { delete result; }

lq_status lq_gradcheck_summary_get(const lq_gradcheck_result* result,
                                   lq_gradcheck_summary* out) {
  if (!result || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  const lqsep::GradcheckResult& r = result->result;
  out->cases = static_cast<int>(r.cases.size());
  out->corrected_all_pass = r.corrected_all_pass ? 1 : 0;
  out->legacy_fails_where_expected = r.legacy_fails_where_expected ? 1 : 0;
  out->legacy_gap_fraction = r.legacy_gap_fraction;
  out->reference_point_pass = r.reference_point_pass ? 1 : 0;
  out->pass = r.pass ? 1 : 0;
  return LQ_OK;
}

lq_status lq_gradcheck_case_get(const lq_gradcheck_result* result, size_t index,
                                lq_gradcheck_case* out) {
  if (!result || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  if (index >= result->result.cases.size()) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "case index out of range");
  }
  const lqsep::GradcheckCase& c = result->result.cases[index];
  out->params = to_c(c.params);
  out->dsdw_error = c.dsdw_error;
  out->dsdw_pass = c.dsdw_pass ? 1 : 0;
  out->djdw_total_error = c.djdw_total_error;
  out->djdw_total_pass = c.djdw_total_pass ? 1 : 0;
  out->djdw_frozen_error = c.djdw_frozen_error;
  out->djdw_frozen_expected_fail = c.djdw_frozen_expected_fail ? 1 : 0;
  out->djdw_frozen_failed = c.djdw_frozen_failed ? 1 : 0;
  out->grad_corrected_error = c.grad_corrected_error;
  out->grad_corrected_pass = c.grad_corrected_pass ? 1 : 0;
  out->grad_legacy_error = c.grad_legacy_error;
  out->legacy_gap_expected = c.legacy_gap_expected ? 1 : 0;
  out->legacy_gap_observed = c.legacy_gap_observed ? 1 : 0;
  return LQ_OK;
}

/* ------------------------------------------------------------------ */

lq_status lq_reconstruct(lq_params w, const lq_pair* x_batch, size_t n,
                         const lq_recurrence_config* recurrence,
                         lq_pair* out_pairs, size_t* out_kept_indices,
                         size_t* out_kept_count, lq_reconstruct_stats* stats) {
  if (!x_batch || !out_pairs || !out_kept_indices || !out_kept_count) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  }
  return wrap([&] {
    lqsep::ReconstructionResult r = lqsep::reconstruct_batch(
        to_cpp(w), to_cpp_batch(x_batch, n), to_cpp(recurrence));
    *out_kept_count = r.kept.size();
    for (size_t i = 0; i < r.kept.size(); ++i) {
      out_pairs[i] = to_c(r.outputs[i]);
      out_kept_indices[i] = r.kept[i];
    }
    if (stats) {
      stats->converged = r.converged;
      stats->max_iterations = r.max_iterations;
      stats->recovered = r.recovered;
      stats->dropped = r.dropped;
    }
  });
}

void lq_train_config_init(lq_train_config* cfg) {
  if (!cfg) return;
  lqsep::OptimizerConfig d;
  cfg->learning_rate = d.learning_rate;
  cfg->max_epochs = d.max_epochs;
  cfg->gradient_tolerance = d.gradient_tolerance;
  cfg->gradient_variant = static_cast<int>(d.variant);
  cfg->score_mode = static_cast<int>(d.score_mode);
  cfg->analytic1 = {d.analytic1.mean, d.analytic1.stddev};
  cfg->analytic2 = {d.analytic2.mean, d.analytic2.stddev};
  cfg->kernel_bandwidth = d.kernel_bandwidth;
  cfg->refit_every = d.refit_every;
  cfg->initial_params = to_c(d.initial_params);
  cfg->jacobian_floor = d.jacobian_floor;
  lq_recurrence_config_init(&cfg->recurrence);
  cfg->halve_on_decrease = d.halve_on_decrease ? 1 : 0;
  cfg->seed = d.seed;
}

lq_status lq_train(const lq_pair* x_batch, size_t n,
                   const lq_train_config* cfg, lq_train_report** out) {
  if (!x_batch || !cfg || !out) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  }
  if (cfg->gradient_variant != LQ_GRADIENT_CORRECTED &&
      cfg->gradient_variant != LQ_GRADIENT_LEGACY) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "bad gradient variant");
  }
  if (cfg->score_mode != LQ_SCORES_ANALYTIC &&
      cfg->score_mode != LQ_SCORES_KERNEL) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "bad score mode");
  }
  *out = nullptr;
  return wrap([&] {
    lqsep::OptimizerConfig c;
    c.learning_rate = cfg->learning_rate;
    c.max_epochs = cfg->max_epochs;
    c.gradient_tolerance = cfg->gradient_tolerance;
    c.variant = static_cast<lqsep::GradientVariant>(cfg->gradient_variant);
    c.score_mode = static_cast<lqsep::ScoreMode>(cfg->score_mode);
    c.analytic1 = lqsep::gaussian_score(cfg->analytic1.mean,
                                        cfg->analytic1.stddev);
    c.analytic2 = lqsep::gaussian_score(cfg->analytic2.mean,
                                        cfg->analytic2.stddev);
    c.kernel_bandwidth = cfg->kernel_bandwidth;
    c.refit_every = cfg->refit_every;
    c.initial_params = to_cpp(cfg->initial_params);
    c.jacobian_floor = cfg->jacobian_floor;
    c.recurrence = to_cpp(&cfg->recurrence);
    c.halve_on_decrease = cfg->halve_on_decrease != 0;
    c.seed = cfg->seed;
    *out = new lq_train_report{lqsep::train(to_cpp_batch(x_batch, n), c)};
  });
}

void lq_train_report_free(lq_train_report* report) { delete report; }

lq_status lq_train_report_final_params(const lq_train_report* report,
                                       lq_params* out) {
  if (!report || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  *out = to_c(report->report.final_params);
  return LQ_OK;
}

lq_status lq_train_report_status(const lq_train_report* report, int* out) {
  if (!report || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  *out = static_cast<int>(report->report.status);
  return LQ_OK;
}

lq_status lq_train_report_epochs(const lq_train_report* report, int* out) {
  if (!report || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  *out = report->report.epochs;
  return LQ_OK;
}

lq_status lq_train_report_trajectory_size(const lq_train_report* report,
                                          size_t* out) {
  if (!report || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  *out = report->report.trajectory.size();
  return LQ_OK;
}

lq_status lq_train_report_epoch(const lq_train_report* report, size_t index,
                                lq_epoch_record* out) {
  if (!report || !out) return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  if (index >= report->report.trajectory.size()) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "epoch index out of range");
  }
  const lqsep::EpochRecord& e = report->report.trajectory[index];
  out->params = to_c(e.params);
  out->log_likelihood = e.log_likelihood;
  out->grad_inf_norm = e.grad_inf_norm;
  out->excluded = e.excluded;
  return LQ_OK;
}

lq_status lq_align_and_score(const lq_pair* outputs, const lq_pair* truth,
                             size_t n, lq_separation_metrics* out) {
  if (!outputs || !truth || !out) {
    return fail(LQ_ERR_INVALID_ARGUMENT, "null pointer");
  }
  return wrap([&] {
    lqsep::SeparationMetrics m = lqsep::align_and_score(
        to_cpp_batch(outputs, n), to_cpp_batch(truth, n));
    out->sir1_db = m.sir1_db;
    out->sir2_db = m.sir2_db;
    out->swapped = m.swapped ? 1 : 0;
  });
}

/* ------------------------------------------------------------------ */

lq_rng* lq_rng_create(uint64_t seed) {
  return new (std::nothrow) lq_rng{lqsep::Rng(seed)};
}

void lq_rng_free(lq_rng* rng) { delete rng; }

uint64_t lq_rng_next(lq_rng* rng) { return rng->rng.next_u64(); }

double lq_rng_uniform(lq_rng* rng, double lo, double hi) {
  return rng->rng.uniform(lo, hi);
}

double lq_rng_gaussian(lq_rng* rng, double mean, double stddev) {
  return rng->rng.gaussian(mean, stddev);
}

double lq_rng_laplace(lq_rng* rng, double mean, double scale) {
  return rng->rng.laplace(mean, scale);
}

} /* extern "C" */
