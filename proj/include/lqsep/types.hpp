#ifndef LQSEP_TYPES_HPP
#define LQSEP_TYPES_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace lqsep {

/// Error categories. Kept in sync with the lq_status codes of the C API.
enum class Errc {
  invalid_argument = 1,
  degenerate_coefficients,
  negative_discriminant,
  mixed_sign,
  singular_jacobian,
  too_few_samples,
  zero_variance,
  no_real_root,
  branch_crossing,
  all_samples_failed,
  non_finite_density,
  length_mismatch,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Mixture coefficients in canonical order [l1, l2, q1, q2].
struct MixingParams {
  double l1 = 0.0;
  double l2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;

  std::array<double, 4> as_array() const { return {l1, l2, q1, q2}; }
  static MixingParams from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
};

/// Coefficients of the unnormalized model x_i = a_i1*u1 + a_i2*u2 + b_i*u1*u2.
struct RawCoefficients {
  double a11, a12, a21, a22, b1, b2;
};

/// One two-channel sample: a source pair, an observation pair or a
/// separator output pair depending on context.
struct SamplePair {
  double first = 0.0;
  double second = 0.0;
};

using SignalBatch = std::vector<SamplePair>;

struct Interval {
  double lo, hi;
};

/// 2x2 real matrix, row major.
struct Mat2 {
  double a11, a12, a21, a22;
  double det() const { return a11 * a22 - a12 * a21; }
};

using Vec2 = std::array<double, 2>;
using Vec4 = std::array<double, 4>;

inline bool is_finite(const SamplePair& p) {
  return std::isfinite(p.first) && std::isfinite(p.second);
}

inline bool is_finite(const MixingParams& w) {
  return std::isfinite(w.l1) && std::isfinite(w.l2) && std::isfinite(w.q1) &&
         std::isfinite(w.q2);
}

}  // namespace lqsep

#endif  // LQSEP_TYPES_HPP
