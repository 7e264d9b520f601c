#include "lqsep/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace lqsep {

namespace {

constexpr double kSirSentinelDb = 350.0;

struct FitStats {
  double alpha = 0.0, beta = 0.0;
};

FitStats affine_fit(const std::vector<double>& s, const std::vector<double>& y) {
  double n = static_cast<double>(s.size());
  double ms = 0.0, my = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ms += s[i];
    my += y[i];
  }
  ms /= n;
  my /= n;
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cov += (s[i] - ms) * (y[i] - my);
    var += (s[i] - ms) * (s[i] - ms);
  }
  if (var == 0.0) {
    throw Error(Errc::zero_variance, "SIR fit: constant source channel");
  }
  FitStats f;
  f.alpha = cov / var;
  f.beta = my - f.alpha * ms;
  return f;
}

double sir_db(const std::vector<double>& s, const std::vector<double>& y) {
  FitStats f = affine_fit(s, y);
  double n = static_cast<double>(s.size());
  double total = 0.0, resid = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double r = y[i] - f.alpha * s[i] - f.beta;
    total += y[i] * y[i];
    resid += r * r;
  }
  total /= n;
  resid /= n;
  if (resid == 0.0) return kSirSentinelDb;
  return 10.0 * std::log10(total / resid);
}

}  // namespace

ReconstructionResult reconstruct_batch(const MixingParams& w,
                                       const SignalBatch& x_batch,
                                       const RecurrenceConfig& recurrence) {
  if (x_batch.empty()) {
    throw Error(Errc::invalid_argument, "reconstruct: empty batch");
  }

  ReconstructionResult res;
  res.outputs.reserve(x_batch.size());
  res.kept.reserve(x_batch.size());
  std::vector<std::size_t> diverged;

  double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1;
  double lo2 = lo1, hi2 = -lo1;

  for (std::size_t i = 0; i < x_batch.size(); ++i) {
    if (!is_finite(x_batch[i])) {
      throw Error(Errc::invalid_argument,
                  "reconstruct: non-finite observation at index " +
                      std::to_string(i));
    }
    RecurrenceResult r = run_recurrence(w, x_batch[i], x_batch[i], recurrence);
    if (r.status == RecurrenceStatus::Diverged) {
      diverged.push_back(i);
      continue;
    }
    if (r.status == RecurrenceStatus::Converged) {
      ++res.converged;
    } else {
      ++res.max_iterations;
    }
    res.outputs.push_back(r.output);
    res.kept.push_back(i);
    lo1 = std::fmin(lo1, r.output.first);
    hi1 = std::fmax(hi1, r.output.first);
    lo2 = std::fmin(lo2, r.output.second);
    hi2 = std::fmax(hi2, r.output.second);
  }

  if (!diverged.empty() && !res.kept.empty()) {
    // Rescue attempt: invert the stragglers directly, picking the branch by
    // the Jacobian sign over the region the successful outputs span.
    JacobianSignClass cls =
        classify_jacobian_sign(w, {lo1, hi1}, {lo2, hi2});
    if (cls != JacobianSignClass::MixedSign) {
      std::vector<std::size_t> still_bad;
      for (std::size_t i : diverged) {
        try {
          SamplePair s = select_root(direct_inverse(w, x_batch[i]), cls);
          res.outputs.push_back(s);
          res.kept.push_back(i);
          ++res.recovered;
        } catch (const Error&) {
          still_bad.push_back(i);
        }
      }
      diverged = std::move(still_bad);
    }
  }
  res.dropped = static_cast<int>(diverged.size());

  if (res.kept.empty()) {
    throw Error(Errc::all_samples_failed,
                "reconstruct: no observation could be separated");
  }

  // Rescued samples were appended out of order; restore input order.
  if (res.recovered > 0) {
    std::vector<std::size_t> order(res.kept.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return res.kept[a] < res.kept[b];
    });
    SignalBatch outputs(res.outputs.size());
    std::vector<std::size_t> kept(res.kept.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      outputs[i] = res.outputs[order[i]];
      kept[i] = res.kept[order[i]];
    }
    res.outputs = std::move(outputs);
    res.kept = std::move(kept);
  }
  return res;
}

namespace {

struct EpochScores {
  ScoreFn psi1, psi2;
};

// Fit (or reuse) the per-channel score models for this epoch's outputs.
class ScoreProvider {
 public:
  explicit ScoreProvider(const OptimizerConfig& cfg) : cfg_(cfg) {}

  EpochScores scores_for(const SignalBatch& outputs, int epoch) {
    if (cfg_.score_mode == ScoreMode::Analytic) {
      GaussianScore g1 = cfg_.analytic1, g2 = cfg_.analytic2;
      return {[g1](double u) { return g1.psi(u); },
              [g2](double u) { return g2.psi(u); }};
    }
    if (!kernel1_ || epoch % std::max(1, cfg_.refit_every) == 0) {
      std::vector<double> ch1(outputs.size()), ch2(outputs.size());
      for (std::size_t i = 0; i < outputs.size(); ++i) {
        ch1[i] = outputs[i].first;
        ch2[i] = outputs[i].second;
      }
      kernel1_ = std::make_shared<KernelScoreModel>(
          fit_kernel_score(ch1, cfg_.kernel_bandwidth));
      kernel2_ = std::make_shared<KernelScoreModel>(
          fit_kernel_score(ch2, cfg_.kernel_bandwidth));
    }
    auto k1 = kernel1_, k2 = kernel2_;
    return {[k1](double u) { return k1->psi(u); },
            [k2](double u) { return k2->psi(u); }};
  }

  double log_density1(double u) const {
    return cfg_.score_mode == ScoreMode::Analytic ? cfg_.analytic1.log_density(u)
                                                  : kernel1_->log_density(u);
  }
  double log_density2(double u) const {
    return cfg_.score_mode == ScoreMode::Analytic ? cfg_.analytic2.log_density(u)
                                                  : kernel2_->log_density(u);
  }

 private:
  OptimizerConfig cfg_;
  std::shared_ptr<KernelScoreModel> kernel1_, kernel2_;
};

}  // namespace

TrainReport train(const SignalBatch& x_batch, const OptimizerConfig& cfg) {
  if (cfg.learning_rate < 0.0 || cfg.max_epochs <= 0 ||
      cfg.gradient_tolerance < 0.0) {
    throw Error(Errc::invalid_argument, "train: bad configuration");
  }

  TrainReport report;
  report.trajectory.reserve(static_cast<std::size_t>(cfg.max_epochs));
  MixingParams w = cfg.initial_params;
  MixingParams last_finite = w;
  double mu = cfg.learning_rate;
  double prev_loglik = -std::numeric_limits<double>::infinity();
  ScoreProvider provider(cfg);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    ReconstructionResult rec;
    try {
      rec = reconstruct_batch(w, x_batch, cfg.recurrence);
    } catch (const Error&) {
      if (epoch == 0) throw;  // nothing learned yet; surface the error
      report.final_params = last_finite;
      report.status = TrainStatus::Diverged;
      report.epochs = epoch;
      return report;
    }
    int excluded = rec.dropped;

    EpochScores scores = provider.scores_for(rec.outputs, epoch);

    // Keep only samples with |J| above the floor; count the rest as
    // excluded for this epoch.
    SignalBatch usable;
    usable.reserve(rec.outputs.size());
    for (const SamplePair& s : rec.outputs) {
      if (std::fabs(jacobian(w, s)) >= cfg.jacobian_floor && is_finite(s)) {
        usable.push_back(s);
      } else {
        ++excluded;
      }
    }

    double loglik = std::numeric_limits<double>::quiet_NaN();
    GradientVector g = {0.0, 0.0, 0.0, 0.0};
    bool finite_metrics = false;
    if (!usable.empty()) {
      try {
        LikelihoodContext ctx(w, usable, scores.psi1, scores.psi2,
                              cfg.jacobian_floor);
        loglik = log_likelihood(
            ctx, [&](double u) { return provider.log_density1(u); },
            [&](double u) { return provider.log_density2(u); });
        g = gradient(ctx, cfg.variant);
        finite_metrics = std::isfinite(loglik) && std::isfinite(g[0]) &&
                         std::isfinite(g[1]) && std::isfinite(g[2]) &&
                         std::isfinite(g[3]);
      } catch (const Error&) {
        finite_metrics = false;
      }
    }

    double gnorm = 0.0;
    for (double v : g) gnorm = std::fmax(gnorm, std::fabs(v));

    report.trajectory.push_back({w, loglik, gnorm, excluded});
    report.epochs = epoch + 1;

    if (!finite_metrics) {
      report.final_params = last_finite;
      report.status = TrainStatus::Diverged;
      return report;
    }
    last_finite = w;

    if (gnorm < cfg.gradient_tolerance) {
      report.final_params = w;
      report.status = TrainStatus::Converged;
      return report;
    }

    if (cfg.halve_on_decrease && epoch > 0 && loglik < prev_loglik) {
      mu *= 0.5;
    }
    prev_loglik = loglik;

    Vec4 a = w.as_array();
    for (int k = 0; k < 4; ++k) a[k] += mu * g[k];
    w = MixingParams::from_array(a);
  }

  report.final_params = w;
  report.status = TrainStatus::MaxEpochs;
  return report;
}

SeparationMetrics align_and_score(const SignalBatch& outputs,
                                  const SignalBatch& truth) {
  if (outputs.size() != truth.size()) {
    throw Error(Errc::length_mismatch,
                "SIR: output and truth batch sizes differ");
  }
  if (outputs.empty()) {
    throw Error(Errc::invalid_argument, "SIR: empty batches");
  }

  std::size_t n = outputs.size();
  std::vector<double> y1(n), y2(n), s1(n), s2(n);
  for (std::size_t i = 0; i < n; ++i) {
    y1[i] = outputs[i].first;
    y2[i] = outputs[i].second;
    s1[i] = truth[i].first;
    s2[i] = truth[i].second;
  }

  double id1 = sir_db(s1, y1), id2 = sir_db(s2, y2);
  double sw1 = sir_db(s2, y1), sw2 = sir_db(s1, y2);

  SeparationMetrics m;
  if (sw1 + sw2 > id1 + id2) {
    m.sir1_db = sw1;
    m.sir2_db = sw2;
    m.swapped = true;
  } else {
    m.sir1_db = id1;
    m.sir2_db = id2;
    m.swapped = false;
  }
  return m;
}

}  // namespace lqsep
