#ifndef LQSEP_LIKELIHOOD_HPP
#define LQSEP_LIKELIHOOD_HPP

#include <vector>

#include "lqsep/mixture.hpp"
#include "lqsep/scores.hpp"

namespace lqsep {

// Maximum-likelihood machinery for the mixture. The average log likelihood
// of the candidate params given recovered sources s(t) is
//   L = E_t[ log f1(s1) + log f2(s2) - log |J(s)| ],
// and the ascent direction needs dL/dw with the dependence of s on w (at
// fixed observations) taken into account. The "legacy" gradient variant
// differentiates log|J| as if s were constant in w; the "corrected" variant
// adds the missing (dJ/ds)·(ds/dw) transport term. Canonical component
// order is [l1, l2, q1, q2] throughout.

/// Gradient (or any 4-vector indexed by parameter) in canonical order.
using GradientVector = Vec4;

inline constexpr double kDefaultJacobianFloor = 1e-8;

/// Sensitivities of the recovered sources to the parameters at fixed
/// observations, from the implicit function theorem applied to
/// f(w, s) = x:  ds/dw = -(df/ds)^{-1} (df/dw). Closed form:
///   ds1/dw = (1/J) [ (1-q2*s1)*s2, (l1+q1*s1)*s1,
///                    (1-q2*s1)*s1*s2, (l1+q1*s1)*s1*s2 ]
///   ds2/dw = (1/J) [ (l2+q2*s2)*s2, (1-q1*s2)*s1,
///                    (l2+q2*s2)*s1*s2, (1-q1*s2)*s1*s2 ]
struct SensitivityMatrix {
  Vec4 ds1_dw;
  Vec4 ds2_dw;
};

/// Throws Errc::singular_jacobian when |J(w, s)| < jacobian_floor.
SensitivityMatrix dsdw(const MixingParams& w, const SamplePair& s,
                       double jacobian_floor = kDefaultJacobianFloor);

/// dJ/dw with s held constant (the legacy term):
///   -[ l2 + q2*s2, l1 + q1*s1, l2*s1 + s2, s1 + l1*s2 ].
GradientVector djdw_explicit(const MixingParams& w, const SamplePair& s);

/// dJ/ds = -[ q2 + l2*q1, q1 + l1*q2 ] (independent of s).
Vec2 djds(const MixingParams& w);

/// Total derivative of J along the solution branch:
///   djdw_explicit + (dJ/ds) · (ds/dw).
GradientVector djdw_total(const MixingParams& w, const SamplePair& s,
                          double jacobian_floor = kDefaultJacobianFloor);

enum class GradientVariant { Corrected, Legacy };

/// Frozen evaluation point for likelihood quantities: candidate params, the
/// recovered sources for one observation batch, and the two score functions.
/// Per-sample Jacobians are validated against the floor once, up front.
class LikelihoodContext {
 public:
  LikelihoodContext(const MixingParams& params, SignalBatch sources,
                    ScoreFn score1, ScoreFn score2,
                    double jacobian_floor = kDefaultJacobianFloor);

  const MixingParams& params() const { return params_; }
  const SignalBatch& sources() const { return sources_; }
  const std::vector<double>& jacobians() const { return jacobians_; }
  double jacobian_floor() const { return jacobian_floor_; }
  double score1(double u) const { return score1_(u); }
  double score2(double u) const { return score2_(u); }

 private:
  MixingParams params_;
  SignalBatch sources_;
  ScoreFn score1_, score2_;
  double jacobian_floor_;
  std::vector<double> jacobians_;
};

/// Batch-average log likelihood. Throws Errc::non_finite_density when a log
/// density comes back non-finite.
double log_likelihood(const LikelihoodContext& ctx,
                      const LogDensityFn& log_density1,
                      const LogDensityFn& log_density2);

/// dL/dw. Per sample the contribution to -dL/dw is
///   psi1(s1)*ds1/dw + psi2(s2)*ds2/dw + (1/J)*dJ/dw,
/// where dJ/dw is djdw_total for the corrected variant and djdw_explicit for
/// the legacy one; the gradient is minus the batch mean of that.
GradientVector gradient(const LikelihoodContext& ctx, GradientVariant variant);
GradientVector gradient_corrected(const LikelihoodContext& ctx);
GradientVector gradient_legacy(const LikelihoodContext& ctx);

}  // namespace lqsep

#endif  // LQSEP_LIKELIHOOD_HPP
