#ifndef LQSEP_SCORES_HPP
#define LQSEP_SCORES_HPP

#include <functional>
#include <span>
#include <vector>

#include "lqsep/types.hpp"

namespace lqsep {

// Score functions psi(u) = -d/du log f(u) for the source densities, plus the
// log densities themselves (needed for likelihood values, not gradients).

using ScoreFn = std::function<double(double)>;
using LogDensityFn = std::function<double(double)>;

struct GaussianScore {
  double mean = 0.0;
  double stddev = 1.0;

  double psi(double u) const { return (u - mean) / (stddev * stddev); }
  double log_density(double u) const;
};

/// Throws Errc::invalid_argument unless stddev > 0 and both fields finite.
GaussianScore gaussian_score(double mean, double stddev);

/// Nonparametric score from a kernel density estimate with the cubic cardinal
/// B-spline kernel B3 (support [-2, 2], unit integral). Sample mass is spread
/// onto a regular knot grid by linear binning, so the density is
///   fhat(u) = (1/h) * sum_k c_k * B3((u - g_k) / h),   sum_k c_k = 1,
/// and psi = -fhat' / fhat is available in closed form. Evaluations outside
/// [min - 2h, max + 2h] are clamped to the nearest endpoint, and fhat is
/// floored at 1e-8 of its grid maximum before dividing or taking logs.
class KernelScoreModel {
 public:
  double psi(double u) const;
  double density(double u) const;
  double density_derivative(double u) const;
  double log_density(double u) const;

  double bandwidth() const { return bandwidth_; }
  Interval support() const { return {support_lo_, support_hi_}; }
  double knot_spacing() const { return spacing_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double knot(std::size_t k) const {
    return support_lo_ + static_cast<double>(k) * spacing_;
  }

 private:
  friend KernelScoreModel fit_kernel_score(std::span<const double> samples,
                                           double bandwidth);
  std::vector<double> coeffs_;  // per-knot mass from linear binning
  double bandwidth_ = 0.0;
  double spacing_ = 0.0;
  double support_lo_ = 0.0;
  double support_hi_ = 0.0;
  double density_floor_ = 0.0;
};

/// Fit the kernel model. bandwidth <= 0 selects Silverman's rule
/// 1.06 * sd * n^(-1/5). Throws Errc::too_few_samples below 10 samples,
/// Errc::zero_variance when all samples coincide, Errc::invalid_argument on
/// non-finite samples.
KernelScoreModel fit_kernel_score(std::span<const double> samples,
                                  double bandwidth = 0.0);

/// The B3 kernel and its derivative (exposed for tests).
double bspline3(double t);
double bspline3_derivative(double t);

}  // namespace lqsep

#endif  // LQSEP_SCORES_HPP
