#include "lqsep/recurrent.hpp"

#include <cmath>
#include <utility>

namespace lqsep {

SamplePair iterate_once(const MixingParams& w, const SamplePair& x,
                        const SamplePair& y) {
  double cross = y.first * y.second;
  return {x.first + w.l1 * y.second + w.q1 * cross,
          x.second + w.l2 * y.first + w.q2 * cross};
}

RecurrenceResult run_recurrence(const MixingParams& w, const SamplePair& x,
                                const SamplePair& y0,
                                const RecurrenceConfig& cfg) {
  SamplePair y = y0;
  for (int n = 1; n <= cfg.max_iterations; ++n) {
    SamplePair next = iterate_once(w, x, y);
    bool in_bounds = std::isfinite(next.first) && std::isfinite(next.second) &&
                     std::fabs(next.first) <= cfg.divergence_bound &&
                     std::fabs(next.second) <= cfg.divergence_bound;
    if (!in_bounds) {
      // Report the last iterate that was still in bounds.
      return {y, RecurrenceStatus::Diverged, n};
    }
    double step = std::fmax(std::fabs(next.first - y.first),
                            std::fabs(next.second - y.second));
    y = next;
    if (step < cfg.tolerance) {
      return {y, RecurrenceStatus::Converged, n};
    }
  }
  return {y, RecurrenceStatus::MaxIterations, cfg.max_iterations};
}

Mat2 recurrence_jacobian(const MixingParams& w, const SamplePair& y) {
  return {w.q1 * y.second, w.l1 + w.q1 * y.first, w.l2 + w.q2 * y.second,
          w.q2 * y.first};
}

StabilityReport stability_at(const MixingParams& w, const SamplePair& s) {
  Mat2 m = recurrence_jacobian(w, s);
  double tr = m.a11 + m.a22;
  double det = m.det();
  double disc = tr * tr - 4.0 * det;
  double mag1, mag2;
  if (disc >= 0.0) {
    double r = std::sqrt(disc);
    mag1 = std::fabs((tr + r) / 2.0);
    mag2 = std::fabs((tr - r) / 2.0);
  } else {
    // Complex conjugate pair: |lambda|^2 = det.
    mag1 = mag2 = std::sqrt(det);
  }
  if (mag1 > mag2) std::swap(mag1, mag2);
  StabilityReport rep;
  rep.magnitude1 = mag1;
  rep.magnitude2 = mag2;
  rep.locally_stable = mag2 < 1.0;
  return rep;
}

}  // namespace lqsep
