#include "lqsep/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lqsep {

namespace {

// Discriminants within this distance below zero are rounding noise from a
// tangent (double-root) configuration and are clamped to exactly zero.
constexpr double kDiscriminantSlack = 1e-12;

// Solve a*t^2 + b*t + c = 0 for the clamped discriminant d = b^2 - 4ac >= 0,
// returning {plus, minus} = {(-b + sqrt(d)) / 2a, (-b - sqrt(d)) / 2a} without
// the usual cancellation: the root where -b and -sqrt(d) add constructively is
// computed directly and the other recovered from the product c/a = t+ * t-.
struct QuadraticRoots {
  double plus, minus;
};

QuadraticRoots solve_quadratic(double a, double b, double c, double d,
                               const char* channel) {
  if (a == 0.0) {
    // Linear case -b*t = c.
    if (b == 0.0) {
      throw Error(Errc::degenerate_coefficients,
                  std::string("inverse is degenerate on channel ") + channel +
                      ": quadratic and linear coefficients both vanish");
    }
    double t = -c / b;
    return {t, t};
  }
  double r = std::sqrt(d);
  if (b >= 0.0) {
    double minus = (-b - r) / (2.0 * a);
    double plus = (minus != 0.0) ? c / (a * minus) : (-b + r) / (2.0 * a);
    return {plus, minus};
  }
  double plus = (-b + r) / (2.0 * a);
  double minus = (plus != 0.0) ? c / (a * plus) : (-b - r) / (2.0 * a);
  return {plus, minus};
}

}  // namespace

MixingParams normalize_raw(const RawCoefficients& raw) {
  if (raw.a11 == 0.0 || raw.a22 == 0.0) {
    throw Error(Errc::degenerate_coefficients,
                "cannot normalize: a diagonal gain is zero");
  }
  MixingParams w;
  w.l1 = -raw.a12 / raw.a22;
  w.l2 = -raw.a21 / raw.a11;
  w.q1 = -raw.b1 / (raw.a11 * raw.a22);
  w.q2 = -raw.b2 / (raw.a11 * raw.a22);
  return w;
}

SamplePair mix(const MixingParams& w, const SamplePair& s) {
  double cross = s.first * s.second;
  return {s.first - w.l1 * s.second - w.q1 * cross,
          s.second - w.l2 * s.first - w.q2 * cross};
}

double jacobian(const MixingParams& w, const SamplePair& s) {
  return 1.0 - w.l1 * w.l2 - (w.q2 + w.l2 * w.q1) * s.first -
         (w.q1 + w.l1 * w.q2) * s.second;
}

Mat2 mixing_jacobian_matrix(const MixingParams& w, const SamplePair& s) {
  return {1.0 - w.q1 * s.second, -w.l1 - w.q1 * s.first,
          -w.l2 - w.q2 * s.second, 1.0 - w.q2 * s.first};
}

InverseCandidates direct_inverse(const MixingParams& w, const SamplePair& x) {
  double a1 = w.q2 + w.l2 * w.q1;
  double a2 = w.q1 + w.l1 * w.q2;
  double lin = w.l1 * w.l2 - 1.0;
  double b1 = w.q1 * x.second - w.q2 * x.first + lin;
  double b2 = w.q2 * x.first - w.q1 * x.second + lin;
  double c1 = x.first + w.l1 * x.second;
  double c2 = x.second + w.l2 * x.first;

  double d1 = b1 * b1 - 4.0 * a1 * c1;
  double d2 = b2 * b2 - 4.0 * a2 * c2;
  if (d1 < 0.0 && d1 > -kDiscriminantSlack) d1 = 0.0;
  if (d2 < 0.0 && d2 > -kDiscriminantSlack) d2 = 0.0;
  if (d1 < 0.0 || d2 < 0.0) {
    throw Error(Errc::negative_discriminant,
                "observation has no real preimage (discriminant " +
                    std::to_string(std::min(d1, d2)) + ")");
  }

  QuadraticRoots r1 = solve_quadratic(a1, b1, c1, d1, "1");
  QuadraticRoots r2 = solve_quadratic(a2, b2, c2, d2, "2");

  InverseCandidates out;
  out.root_plus = {r1.plus, r2.plus};
  out.root_minus = {r1.minus, r2.minus};
  out.delta1 = d1;
  out.delta2 = d2;
  return out;
}

SamplePair select_root(const InverseCandidates& candidates,
                       JacobianSignClass sign_class) {
  switch (sign_class) {
    case JacobianSignClass::AlwaysNegative:
      return candidates.root_plus;
    case JacobianSignClass::AlwaysPositive:
      return candidates.root_minus;
    case JacobianSignClass::MixedSign:
      break;
  }
  throw Error(Errc::mixed_sign,
              "cannot select an inverse branch: Jacobian changes sign over "
              "the operating region");
}

SamplePair permuted_solution(const MixingParams& w, const SamplePair& s) {
  double a1 = w.q2 + w.l2 * w.q1;
  double a2 = w.q1 + w.l1 * w.q2;
  if (a1 == 0.0 || a2 == 0.0) {
    throw Error(Errc::degenerate_coefficients,
                "permuted solution undefined: q2 + l2*q1 or q1 + l1*q2 is "
                "zero");
  }
  double lin = w.l1 * w.l2 - 1.0;
  return {-(a2 / a1) * s.second - lin / a1, -(a1 / a2) * s.first - lin / a2};
}

JacobianSignClass classify_jacobian_sign(const MixingParams& w,
                                         const Interval& s1_range,
                                         const Interval& s2_range) {
  if (!std::isfinite(s1_range.lo) || !std::isfinite(s1_range.hi) ||
      !std::isfinite(s2_range.lo) || !std::isfinite(s2_range.hi) ||
      s1_range.lo > s1_range.hi || s2_range.lo > s2_range.hi) {
    throw Error(Errc::invalid_argument, "invalid source range");
  }
  // J is affine in (s1, s2), so its sign over the rectangle is decided by
  // the four corners.
  double corners[4] = {
      jacobian(w, {s1_range.lo, s2_range.lo}),
      jacobian(w, {s1_range.lo, s2_range.hi}),
      jacobian(w, {s1_range.hi, s2_range.lo}),
      jacobian(w, {s1_range.hi, s2_range.hi}),
  };
  bool all_pos = true, all_neg = true;
  for (double j : corners) {
    all_pos = all_pos && j > 0.0;
    all_neg = all_neg && j < 0.0;
  }
  if (all_pos) return JacobianSignClass::AlwaysPositive;
  if (all_neg) return JacobianSignClass::AlwaysNegative;
  return JacobianSignClass::MixedSign;
}

const char* to_string(JacobianSignClass c) {
  switch (c) {
    case JacobianSignClass::AlwaysNegative:
      return "always_negative";
    case JacobianSignClass::AlwaysPositive:
      return "always_positive";
    case JacobianSignClass::MixedSign:
      return "mixed_sign";
  }
  return "unknown";
}

}  // namespace lqsep
