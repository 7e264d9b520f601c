#ifndef LQSEP_RECURRENT_HPP
#define LQSEP_RECURRENT_HPP

#include "lqsep/types.hpp"

namespace lqsep {

// Recurrent separating network. Given an observation pair x, iterate
//   y1 <- x1 + l1*y2 + q1*y1*y2
//   y2 <- x2 + l2*y1_old + q2*y1_old*y2   (both channels from the same y)
// whose fixed points are exactly the preimages of x under the mixture.

struct RecurrenceConfig {
  int max_iterations = 200;
  double tolerance = 1e-10;       // sup-norm step size that counts as converged
  double divergence_bound = 1e6;  // iterate magnitude that counts as diverged
};

enum class RecurrenceStatus { Converged, MaxIterations, Diverged };

struct RecurrenceResult {
  SamplePair output;
  RecurrenceStatus status = RecurrenceStatus::MaxIterations;
  int iterations = 0;
};

/// One synchronous update of both channels.
SamplePair iterate_once(const MixingParams& w, const SamplePair& x,
                        const SamplePair& y);

/// Run the recurrence from y0 until the step is below cfg.tolerance, the
/// iterate leaves [-divergence_bound, divergence_bound]^2 (or turns
/// non-finite), or max_iterations updates have been applied. On divergence
/// `output` holds the last in-bounds iterate.
RecurrenceResult run_recurrence(const MixingParams& w, const SamplePair& x,
                                const SamplePair& y0,
                                const RecurrenceConfig& cfg = {});

/// Derivative of one update with respect to y:
///   [[q1*y2, l1 + q1*y1], [l2 + q2*y2, q2*y1]].
Mat2 recurrence_jacobian(const MixingParams& w, const SamplePair& y);

struct StabilityReport {
  double magnitude1 = 0.0;  // eigenvalue magnitudes, ascending
  double magnitude2 = 0.0;
  bool locally_stable = false;  // both magnitudes strictly below 1
};

/// Local stability of the recurrence at a fixed point y = s: spectral radius
/// of recurrence_jacobian below 1.
StabilityReport stability_at(const MixingParams& w, const SamplePair& s);

}  // namespace lqsep

#endif  // LQSEP_RECURRENT_HPP
