#ifndef LQSEP_FDCHECK_HPP
#define LQSEP_FDCHECK_HPP

#include <cstdint>
#include <vector>

#include "lqsep/likelihood.hpp"

namespace lqsep {

// Independent numerical oracle for every analytic derivative in the library.
// All checks differentiate through the closed-form inverse (observations held
// fixed, branch tracked by a hint), so they share no code path with the
// analytic formulas they validate.

struct FdConfig {
  double step = 1e-6;                 // central-difference half step
  double relative_tolerance = 1e-6;   // pass threshold for the error metric
};

// Error metric: per component |analytic - numeric| / |numeric|, except that
// components with |numeric| < 1e-6 are held to the absolute bound
// |analytic - numeric| <= 1e-9 instead (and contribute 0 when they meet it).
inline constexpr double kFdReferenceFloor = 1e-6;
inline constexpr double kFdAbsoluteSlack = 1e-9;

struct DerivativeReport {
  std::vector<double> analytic;
  std::vector<double> numeric;
  double max_relative_error = 0.0;
  bool pass = false;
};

/// Closed-form inversion resolved to a single branch: of the two candidate
/// preimages of x, return the one closer (in sup norm) to `hint`. Throws
/// Errc::no_real_root when x has no real preimage.
SamplePair invert_for_sources(const MixingParams& w, const SamplePair& x,
                              const SamplePair& hint);

/// Central-difference check of dsdw at the branch through `hint`. A perturbed
/// root jumping farther than 100 * step from the base root aborts with
/// Errc::branch_crossing rather than returning a garbage difference.
DerivativeReport fd_dsdw(const MixingParams& w, const SamplePair& x,
                         const SamplePair& hint, const FdConfig& cfg = {});

/// Central-difference check of dJ/dw along the solution branch (the honest
/// total derivative). `total` compares against djdw_total and is expected to
/// pass; `frozen_sources` compares the same numeric values against
/// djdw_explicit, which is exactly the quantity the legacy gradient plugs in,
/// and fails whenever the transport term it drops is material.
struct DjdwReports {
  DerivativeReport total;
  DerivativeReport frozen_sources;
};
DjdwReports fd_djdw(const MixingParams& w, const SamplePair& x,
                    const SamplePair& hint, const FdConfig& cfg = {});

/// Central-difference check of the batch log-likelihood gradient, numeric
/// side computed by re-inverting the whole batch at perturbed params.
struct GradientReports {
  DerivativeReport corrected;
  DerivativeReport legacy;
};
GradientReports fd_gradient(const MixingParams& w, const SignalBatch& x_batch,
                            const SignalBatch& hints, const ScoreFn& score1,
                            const ScoreFn& score2, const LogDensityFn& logf1,
                            const LogDensityFn& logf2, const FdConfig& cfg = {},
                            double jacobian_floor = kDefaultJacobianFloor);

/// Compare an analytic vector against its numeric reference with the metric
/// described above.
DerivativeReport compare_derivatives(std::vector<double> analytic,
                                     std::vector<double> numeric,
                                     double relative_tolerance);

// ---------------------------------------------------------------------------
// Seeded campaign over random admissible configurations.

struct GradcheckConfig {
  std::uint64_t seed = 424242;
  int cases = 100;
  int batch_size = 50;
  double step = 1e-6;
  double tolerance = 1e-5;
  bool linear_only = false;  // restrict draws to q1 = q2 = 0
};

struct GradcheckCase {
  MixingParams params;
  double dsdw_error = 0.0;
  bool dsdw_pass = false;
  double djdw_total_error = 0.0;
  bool djdw_total_pass = false;
  double djdw_frozen_error = 0.0;
  bool djdw_frozen_expected_fail = false;
  bool djdw_frozen_failed = false;
  double grad_corrected_error = 0.0;
  bool grad_corrected_pass = false;
  double grad_legacy_error = 0.0;
  bool legacy_gap_expected = false;  // quadratic terms material for this draw
  bool legacy_gap_observed = false;  // legacy error > 10x corrected error
};

struct GradcheckResult {
  std::vector<GradcheckCase> cases;
  bool corrected_all_pass = false;
  bool legacy_fails_where_expected = false;
  double legacy_gap_fraction = 0.0;  // among cases where a gap was expected
  bool reference_point_pass = false; // frozen worked-example values
  bool pass = false;
};

GradcheckResult run_gradcheck(const GradcheckConfig& cfg = {});

}  // namespace lqsep

#endif  // LQSEP_FDCHECK_HPP
