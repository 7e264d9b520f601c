#include "lqsep/likelihood.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace lqsep {

namespace {

double checked_jacobian(const MixingParams& w, const SamplePair& s,
                        double floor, const char* who) {
  double j = jacobian(w, s);
  if (std::fabs(j) < floor) {
    throw Error(Errc::singular_jacobian,
                std::string(who) + ": |J| = " + std::to_string(std::fabs(j)) +
                    " below floor " + std::to_string(floor));
  }
  return j;
}

}  // namespace

SensitivityMatrix dsdw(const MixingParams& w, const SamplePair& s,
                       double jacobian_floor) {
  double j = checked_jacobian(w, s, jacobian_floor, "dsdw");
  double inv = 1.0 / j;
  double s1 = s.first, s2 = s.second;
  double cross = s1 * s2;
  double p1 = 1.0 - w.q2 * s1;   // cofactor entries of (df/ds)^{-1}
  double p2 = w.l1 + w.q1 * s1;
  double p3 = w.l2 + w.q2 * s2;
  double p4 = 1.0 - w.q1 * s2;
  SensitivityMatrix m;
  m.ds1_dw = {inv * p1 * s2, inv * p2 * s1, inv * p1 * cross,
              inv * p2 * cross};
  m.ds2_dw = {inv * p3 * s2, inv * p4 * s1, inv * p3 * cross,
              inv * p4 * cross};
  return m;
}

GradientVector djdw_explicit(const MixingParams& w, const SamplePair& s) {
  return {-(w.l2 + w.q2 * s.second), -(w.l1 + w.q1 * s.first),
          -(w.l2 * s.first + s.second), -(s.first + w.l1 * s.second)};
}

Vec2 djds(const MixingParams& w) {
  return {-(w.q2 + w.l2 * w.q1), -(w.q1 + w.l1 * w.q2)};
}

GradientVector djdw_total(const MixingParams& w, const SamplePair& s,
                          double jacobian_floor) {
  GradientVector out = djdw_explicit(w, s);
  SensitivityMatrix m = dsdw(w, s, jacobian_floor);
  Vec2 d = djds(w);
  for (int k = 0; k < 4; ++k) {
    out[k] += d[0] * m.ds1_dw[k] + d[1] * m.ds2_dw[k];
  }
  return out;
}

LikelihoodContext::LikelihoodContext(const MixingParams& params,
                                     SignalBatch sources, ScoreFn score1,
                                     ScoreFn score2, double jacobian_floor)
    : params_(params),
      sources_(std::move(sources)),
      score1_(std::move(score1)),
      score2_(std::move(score2)),
      jacobian_floor_(jacobian_floor) {
  if (sources_.empty()) {
    throw Error(Errc::invalid_argument, "likelihood context: empty batch");
  }
  if (!score1_ || !score2_) {
    throw Error(Errc::invalid_argument, "likelihood context: missing score");
  }
  jacobians_.reserve(sources_.size());
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (!is_finite(sources_[i])) {
      throw Error(Errc::invalid_argument,
                  "likelihood context: non-finite sample at index " +
                      std::to_string(i));
    }
    jacobians_.push_back(checked_jacobian(params_, sources_[i],
                                          jacobian_floor_,
                                          "likelihood context"));
  }
}

double log_likelihood(const LikelihoodContext& ctx,
                      const LogDensityFn& log_density1,
                      const LogDensityFn& log_density2) {
  const SignalBatch& s = ctx.sources();
  const std::vector<double>& jac = ctx.jacobians();
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double lf1 = log_density1(s[i].first);
    double lf2 = log_density2(s[i].second);
    if (!std::isfinite(lf1) || !std::isfinite(lf2)) {
      throw Error(Errc::non_finite_density,
                  "log density is non-finite at sample " + std::to_string(i));
    }
    acc += lf1 + lf2 - std::log(std::fabs(jac[i]));
  }
  return acc / static_cast<double>(s.size());
}

GradientVector gradient(const LikelihoodContext& ctx,
                        GradientVariant variant) {
  const MixingParams& w = ctx.params();
  const SignalBatch& s = ctx.sources();
  const std::vector<double>& jac = ctx.jacobians();
  GradientVector acc = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < s.size(); ++i) {
    SensitivityMatrix m = dsdw(w, s[i], ctx.jacobian_floor());
    GradientVector dj = variant == GradientVariant::Corrected
                            ? djdw_total(w, s[i], ctx.jacobian_floor())
                            : djdw_explicit(w, s[i]);
    double p1 = ctx.score1(s[i].first);
    double p2 = ctx.score2(s[i].second);
    double invj = 1.0 / jac[i];
    for (int k = 0; k < 4; ++k) {
      acc[k] += p1 * m.ds1_dw[k] + p2 * m.ds2_dw[k] + invj * dj[k];
    }
  }
  double scale = -1.0 / static_cast<double>(s.size());
  for (double& v : acc) v *= scale;
  return acc;
}

GradientVector gradient_corrected(const LikelihoodContext& ctx) {
  return gradient(ctx, GradientVariant::Corrected);
}

GradientVector gradient_legacy(const LikelihoodContext& ctx) {
  return gradient(ctx, GradientVariant::Legacy);
}

}  // namespace lqsep
