#include "lqsep/scores.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace lqsep {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kDensityFloorRatio = 1e-8;
constexpr std::size_t kMaxKnots = 8192;
constexpr std::size_t kMinSamples = 10;
}  // namespace

double GaussianScore::log_density(double u) const {
  double z = (u - mean) / stddev;
  return -0.5 * (z * z + kLog2Pi) - std::log(stddev);
}

GaussianScore gaussian_score(double mean, double stddev) {
  if (!std::isfinite(mean) || !std::isfinite(stddev) || stddev <= 0.0) {
    throw Error(Errc::invalid_argument,
                "gaussian score requires finite mean and stddev > 0");
  }
  return {mean, stddev};
}

double bspline3(double t) {
  t = std::fabs(t);
  if (t >= 2.0) return 0.0;
  if (t <= 1.0) return 2.0 / 3.0 - t * t + 0.5 * t * t * t;
  double u = 2.0 - t;
  return u * u * u / 6.0;
}

double bspline3_derivative(double t) {
  double sign = t < 0.0 ? -1.0 : 1.0;
  t = std::fabs(t);
  if (t >= 2.0) return 0.0;
  if (t <= 1.0) return sign * (-2.0 * t + 1.5 * t * t);
  double u = 2.0 - t;
  return sign * (-0.5 * u * u);
}

KernelScoreModel fit_kernel_score(std::span<const double> samples,
                                  double bandwidth) {
  std::size_t n = samples.size();
  if (n < kMinSamples) {
    throw Error(Errc::too_few_samples,
                "kernel fit needs at least " + std::to_string(kMinSamples) +
                    " samples, got " + std::to_string(n));
  }

  double mean = 0.0, lo = samples[0], hi = samples[0];
  for (double v : samples) {
    if (!std::isfinite(v)) {
      throw Error(Errc::invalid_argument, "kernel fit given non-finite sample");
    }
    mean += v;
    lo = std::fmin(lo, v);
    hi = std::fmax(hi, v);
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(n));
  if (sd == 0.0) {
    throw Error(Errc::zero_variance, "kernel fit given constant samples");
  }

  double h = bandwidth > 0.0
                 ? bandwidth
                 : 1.06 * sd * std::pow(static_cast<double>(n), -0.2);

  KernelScoreModel m;
  m.bandwidth_ = h;
  m.support_lo_ = lo - 2.0 * h;
  m.support_hi_ = hi + 2.0 * h;

  double span = m.support_hi_ - m.support_lo_;
  // Knot spacing h/8 keeps the grid much finer than the kernel; cap the knot
  // count for pathological bandwidth/range ratios.
  auto wanted = static_cast<std::size_t>(std::ceil(span / (h / 8.0))) + 1;
  std::size_t count = std::clamp<std::size_t>(wanted, 2, kMaxKnots);
  m.spacing_ = span / static_cast<double>(count - 1);

  m.coeffs_.assign(count, 0.0);
  double mass = 1.0 / static_cast<double>(n);
  for (double v : samples) {
    double t = (v - m.support_lo_) / m.spacing_;
    auto i = static_cast<std::size_t>(t);
    if (i > count - 2) i = count - 2;
    double frac = t - static_cast<double>(i);
    m.coeffs_[i] += (1.0 - frac) * mass;
    m.coeffs_[i + 1] += frac * mass;
  }

  double max_density = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    max_density = std::fmax(max_density, m.density(m.knot(k)));
  }
  m.density_floor_ = kDensityFloorRatio * max_density;
  return m;
}

double KernelScoreModel::density(double u) const {
  u = std::clamp(u, support_lo_, support_hi_);
  double reach = 2.0 * bandwidth_;
  auto count = coeffs_.size();
  double t_lo = (u - reach - support_lo_) / spacing_;
  double t_hi = (u + reach - support_lo_) / spacing_;
  std::size_t k0 = t_lo <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_lo));
  auto k1_raw = static_cast<long long>(std::floor(t_hi));
  if (k1_raw < 0) return 0.0;
  std::size_t k1 = std::min<std::size_t>(static_cast<std::size_t>(k1_raw),
                                         count - 1);
  double acc = 0.0;
  for (std::size_t k = k0; k <= k1; ++k) {
    acc += coeffs_[k] * bspline3((u - knot(k)) / bandwidth_);
  }
  return acc / bandwidth_;
}

double KernelScoreModel::density_derivative(double u) const {
  u = std::clamp(u, support_lo_, support_hi_);
  double reach = 2.0 * bandwidth_;
  auto count = coeffs_.size();
  double t_lo = (u - reach - support_lo_) / spacing_;
  double t_hi = (u + reach - support_lo_) / spacing_;
  std::size_t k0 = t_lo <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_lo));
  auto k1_raw = static_cast<long long>(std::floor(t_hi));
  if (k1_raw < 0) return 0.0;
  std::size_t k1 = std::min<std::size_t>(static_cast<std::size_t>(k1_raw),
                                         count - 1);
  double acc = 0.0;
  for (std::size_t k = k0; k <= k1; ++k) {
    acc += coeffs_[k] * bspline3_derivative((u - knot(k)) / bandwidth_);
  }
  return acc / (bandwidth_ * bandwidth_);
}

double KernelScoreModel::psi(double u) const {
  double f = std::fmax(density(u), density_floor_);
  return -density_derivative(u) / f;
}

double KernelScoreModel::log_density(double u) const {
  return std::log(std::fmax(density(u), density_floor_));
}

}  // namespace lqsep
