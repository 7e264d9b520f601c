#ifndef LQSEP_MIXTURE_HPP
#define LQSEP_MIXTURE_HPP

#include "lqsep/types.hpp"

namespace lqsep {

// Mixing model (normalized form):
//   x1 = s1 - l1*s2 - q1*s1*s2
//   x2 = s2 - l2*s1 - q2*s1*s2
// All routines below take params in the canonical order [l1, l2, q1, q2].

enum class JacobianSignClass { AlwaysNegative, AlwaysPositive, MixedSign };

/// The two candidate source pairs produced by the closed-form inverse.
/// root_plus pairs the (-b + sqrt(delta)) branch of both channels,
/// root_minus the (-b - sqrt(delta)) branch; the discriminants delta1 and
/// delta2 are equal up to rounding and equal the squared Jacobian at the
/// recovered sources.
struct InverseCandidates {
  SamplePair root_plus;
  SamplePair root_minus;
  double delta1 = 0.0;
  double delta2 = 0.0;
};

/// Divide out the diagonal gains of a general bilinear mixture
///   x1 = a11*u1 + a12*u2 + b1*u1*u2
///   x2 = a21*u1 + a22*u2 + b2*u1*u2
/// so that it takes the normalized form above (sources rescaled by the
/// diagonal gains). Throws Errc::degenerate_coefficients when a11 or a22
/// is zero.
MixingParams normalize_raw(const RawCoefficients& raw);

/// Apply the mixture to one source pair.
SamplePair mix(const MixingParams& w, const SamplePair& s);

/// Jacobian determinant of the source-to-observation map,
///   J(s) = 1 - l1*l2 - (q2 + l2*q1)*s1 - (q1 + l1*q2)*s2.
/// Affine in s, which is what makes the sign classification below exact.
double jacobian(const MixingParams& w, const SamplePair& s);

/// Full 2x2 derivative of the map, [[dx1/ds1, dx1/ds2], [dx2/ds1, dx2/ds2]].
/// Its determinant equals jacobian(w, s).
Mat2 mixing_jacobian_matrix(const MixingParams& w, const SamplePair& s);

/// Closed-form inversion of one observation pair. Each channel reduces to a
/// quadratic a_i*s_i^2 + b_i*s_i + c_i = 0 with
///   a1 = q2 + l2*q1            a2 = q1 + l1*q2
///   b1 = q1*x2 - q2*x1 + l1*l2 - 1
///   b2 = q2*x1 - q1*x2 + l1*l2 - 1
///   c1 = x1 + l1*x2            c2 = x2 + l2*x1
/// When a_i == 0 the channel degenerates to the linear equation
/// -b_i*s_i = c_i (throws Errc::degenerate_coefficients when b_i == 0 too).
/// Discriminants in (-1e-12, 0) are treated as 0 (tangent case); anything
/// more negative throws Errc::negative_discriminant.
InverseCandidates direct_inverse(const MixingParams& w, const SamplePair& x);

/// Pick the candidate that reproduces the true sources given the sign of the
/// Jacobian over the operating region: root_plus when J < 0 everywhere,
/// root_minus when J > 0 everywhere. Throws Errc::mixed_sign otherwise.
SamplePair select_root(const InverseCandidates& candidates,
                       JacobianSignClass sign_class);

/// The spurious preimage paired with source pair s: the other solution of the
/// inversion quadratics,
///   shat1 = -(a2/a1)*s2 - (l1*l2 - 1)/a1
///   shat2 = -(a1/a2)*s1 - (l1*l2 - 1)/a2.
/// mix(w, permuted_solution(w, s)) == mix(w, s). Throws
/// Errc::degenerate_coefficients when a1 or a2 is zero.
SamplePair permuted_solution(const MixingParams& w, const SamplePair& s);

/// Exact sign classification of J over an axis-aligned source rectangle:
/// since J is
/// affine in s it suffices to inspect the four corners.
JacobianSignClass classify_jacobian_sign(const MixingParams& w,
                                         const Interval& s1_range,
                                         const Interval& s2_range);

const char* to_string(JacobianSignClass c);

}  // namespace lqsep

#endif  // LQSEP_MIXTURE_HPP
