// Gradient-ascent training loop, batch reconstruction, and SIR alignment.
//
// Expected values below were frozen from probe runs of the independent
// pieces (closed-form inversion, finite-difference-checked gradients); the
// training-loop assertions are mechanical (exact parameter bookkeeping)
// rather than statistical wherever possible.

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "lqsep/likelihood.hpp"
#include "lqsep/mixture.hpp"
#include "lqsep/optimizer.hpp"
#include "lqsep/rng.hpp"
#include "lqsep/scores.hpp"
#include "testutil.hpp"

using namespace lqsep;
using testutil::reference_params;
using testutil::sup_dist;

namespace {

SignalBatch mixed_box_batch(const MixingParams& w, std::uint64_t seed,
                            std::uint64_t stream, int n,
                            SignalBatch* sources = nullptr) {
  Rng rng = Rng::derived(seed, stream);
  SignalBatch obs;
  obs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SamplePair s{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    if (sources) sources->push_back(s);
    obs.push_back(mix(w, s));
  }
  return obs;
}

double param_err(const MixingParams& a, const MixingParams& b) {
  return std::max({std::fabs(a.l1 - b.l1), std::fabs(a.l2 - b.l2),
                   std::fabs(a.q1 - b.q1), std::fabs(a.q2 - b.q2)});
}

bool params_identical(const MixingParams& a, const MixingParams& b) {
  return a.l1 == b.l1 && a.l2 == b.l2 && a.q1 == b.q1 && a.q2 == b.q2;
}

}  // namespace

TEST_CASE("reconstruction at the identity mixture returns the observations") {
  SignalBatch obs = mixed_box_batch({0, 0, 0, 0}, 31, 0, 64);
  ReconstructionResult rec = reconstruct_batch({0, 0, 0, 0}, obs);
  REQUIRE(rec.kept.size() == obs.size());
  CHECK(rec.converged == 64);
  CHECK(rec.max_iterations == 0);
  CHECK(rec.recovered == 0);
  CHECK(rec.dropped == 0);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    CHECK(rec.kept[i] == i);
    // With all coefficients zero the first iterate is already the fixed
    // point, so the outputs are the observations verbatim.
    CHECK(rec.outputs[i].first == obs[i].first);
    CHECK(rec.outputs[i].second == obs[i].second);
  }
}

TEST_CASE("reconstruction inverts the reference mixture on box sources") {
  MixingParams w = reference_params();
  SignalBatch src;
  SignalBatch obs = mixed_box_batch(w, 32, 0, 300, &src);
  ReconstructionResult rec = reconstruct_batch(w, obs);
  REQUIRE(rec.kept.size() == 300);
  CHECK(rec.converged == 300);
  CHECK(rec.dropped == 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < rec.kept.size(); ++i) {
    worst = std::max(worst, sup_dist(rec.outputs[i], src[rec.kept[i]]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("divergent samples are rescued through the direct inverse in input order") {
  // Sources far outside the recurrence's basin of attraction make the
  // iteration blow up; the closed-form inverse still separates them, with
  // the branch picked from the Jacobian sign over the converged outputs.
  MixingParams w = reference_params();
  Rng rng = Rng::derived(99, 0);
  SignalBatch src;
  for (int i = 0; i < 50; ++i) {
    src.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
  }
  src.push_back({1.5, 1.5});
  src.push_back({1.8, 1.8});
  src.push_back({2.2, 2.2});
  SignalBatch obs;
  for (const SamplePair& s : src) obs.push_back(mix(w, s));

  ReconstructionResult rec = reconstruct_batch(w, obs);
  REQUIRE(rec.kept.size() == src.size());
  CHECK(rec.converged == 50);
  CHECK(rec.recovered == 3);
  CHECK(rec.dropped == 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < rec.kept.size(); ++i) {
    CHECK(rec.kept[i] == i);  // rescued entries were re-sorted into place
    worst = std::max(worst, sup_dist(rec.outputs[i], src[i]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("reconstruction rejects empty and non-finite batches") {
  CHECK_THROWS_WITH_AS(reconstruct_batch(reference_params(), {}),
                       doctest::Contains("empty"), Error);
  SignalBatch bad{{0.1, 0.2}, {std::nan(""), 0.0}};
  try {
    reconstruct_batch(reference_params(), bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_argument);
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }
}

TEST_CASE("reconstruction reports a batch-wide failure honestly") {
  // Strong quadratic coupling plus far-away observations: every recurrence
  // diverges and no converged output exists to anchor a rescue branch.
  MixingParams w{0, 0, 2, 2};
  SignalBatch obs(4, SamplePair{5.0, 5.0});
  try {
    reconstruct_batch(w, obs);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::all_samples_failed);
  }
}

TEST_CASE("training validates its configuration") {
  SignalBatch obs = mixed_box_batch(reference_params(), 33, 0, 16);
  OptimizerConfig cfg;
  cfg.learning_rate = -0.1;
  CHECK_THROWS_AS(train(obs, cfg), Error);
  cfg = OptimizerConfig{};
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(train(obs, cfg), Error);
  cfg = OptimizerConfig{};
  cfg.gradient_tolerance = -1.0;
  CHECK_THROWS_AS(train(obs, cfg), Error);
}

TEST_CASE("convergence is checked before the first update") {
  SignalBatch obs = mixed_box_batch(reference_params(), 5, 0, 100);
  OptimizerConfig cfg;
  cfg.gradient_tolerance = 10.0;  // any finite gradient satisfies this
  cfg.initial_params = {0.1, -0.1, 0.2, 0.3};
  TrainReport rep = train(obs, cfg);
  CHECK(rep.status == TrainStatus::Converged);
  CHECK(rep.epochs == 1);
  CHECK(rep.trajectory.size() == 1);
  CHECK(params_identical(rep.final_params, {0.1, -0.1, 0.2, 0.3}));
}

TEST_CASE("a zero learning rate leaves the parameters untouched") {
  SignalBatch obs = mixed_box_batch(reference_params(), 5, 1, 100);
  OptimizerConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.gradient_tolerance = 0.0;  // unreachable: the loop must run out
  cfg.max_epochs = 25;
  cfg.initial_params = {0.05, 0.05, -0.1, 0.1};
  TrainReport rep = train(obs, cfg);
  CHECK(rep.status == TrainStatus::MaxEpochs);
  CHECK(rep.epochs == 25);
  REQUIRE(rep.trajectory.size() == 25);
  CHECK(params_identical(rep.final_params, cfg.initial_params));
  for (const EpochRecord& t : rep.trajectory) {
    CHECK(params_identical(t.params, cfg.initial_params));
    CHECK(t.excluded == 0);
    CHECK(std::isfinite(t.log_likelihood));
  }
}

TEST_CASE("one epoch applies exactly one gradient step") {
  SignalBatch obs = mixed_box_batch(reference_params(), 5, 2, 200);
  OptimizerConfig cfg;
  cfg.max_epochs = 1;
  cfg.gradient_tolerance = 0.0;
  cfg.learning_rate = 0.15;
  MixingParams w0 = cfg.initial_params;
  TrainReport rep = train(obs, cfg);
  REQUIRE(rep.status == TrainStatus::MaxEpochs);
  REQUIRE(rep.epochs == 1);

  // Assemble the identical step by hand from the public pieces.
  ReconstructionResult rec = reconstruct_batch(w0, obs, cfg.recurrence);
  std::vector<double> c1, c2;
  for (const SamplePair& p : rec.outputs) {
    c1.push_back(p.first);
    c2.push_back(p.second);
  }
  KernelScoreModel k1 = fit_kernel_score(c1, cfg.kernel_bandwidth);
  KernelScoreModel k2 = fit_kernel_score(c2, cfg.kernel_bandwidth);
  SignalBatch usable;
  for (const SamplePair& s : rec.outputs) {
    if (std::fabs(jacobian(w0, s)) >= cfg.jacobian_floor && is_finite(s)) {
      usable.push_back(s);
    }
  }
  LikelihoodContext ctx(w0, usable,
                        ScoreFn([&](double u) { return k1.psi(u); }),
                        ScoreFn([&](double u) { return k2.psi(u); }),
                        cfg.jacobian_floor);
  GradientVector g = gradient(ctx, cfg.variant);
  Vec4 a = w0.as_array();
  for (int k = 0; k < 4; ++k) a[k] += cfg.learning_rate * g[k];
  MixingParams expect = MixingParams::from_array(a);

  CHECK(params_identical(rep.final_params, expect));
  CHECK(params_identical(rep.trajectory[0].params, w0));
}

TEST_CASE("the analytic score gradient nearly vanishes at the true parameters") {
  // With the true scores and the true parameters the expected gradient is
  // zero; the sample average over 1000 draws should be within a few
  // standard errors of that. Narrow sources keep the Jacobian positive
  // everywhere the gaussian actually puts mass.
  MixingParams wt = reference_params();
  Rng rng = Rng::derived(21, 0);
  SignalBatch obs;
  for (int i = 0; i < 1000; ++i) {
    SamplePair s{0.12 * rng.gaussian(), 0.12 * rng.gaussian()};
    obs.push_back(mix(wt, s));
  }
  ReconstructionResult rec = reconstruct_batch(wt, obs);
  REQUIRE(rec.kept.size() == 1000);
  GaussianScore gs{0.0, 0.12};
  LikelihoodContext ctx(wt, rec.outputs,
                        ScoreFn([gs](double u) { return gs.psi(u); }),
                        ScoreFn([gs](double u) { return gs.psi(u); }));
  GradientVector g = gradient_corrected(ctx);
  double gn = 0.0;
  for (double v : g) gn = std::fmax(gn, std::fabs(v));
  CHECK(gn < 0.08);  // measured 0.0496 for this draw

  // Training started at the truth with a tolerance above that level stops
  // immediately and returns the truth unchanged.
  OptimizerConfig cfg;
  cfg.score_mode = ScoreMode::Analytic;
  cfg.analytic1 = {0.0, 0.12};
  cfg.analytic2 = {0.0, 0.12};
  cfg.initial_params = wt;
  cfg.gradient_tolerance = 0.08;
  TrainReport rep = train(obs, cfg);
  CHECK(rep.status == TrainStatus::Converged);
  CHECK(rep.epochs == 1);
  CHECK(params_identical(rep.final_params, wt));
}

TEST_CASE("an oversized learning rate is flagged as divergence and rolled back") {
  SignalBatch obs = mixed_box_batch(reference_params(), 5, 0, 200);
  OptimizerConfig cfg;
  cfg.learning_rate = 1e6;
  cfg.score_mode = ScoreMode::Analytic;
  cfg.analytic1 = {0.0, 0.3};
  cfg.analytic2 = {0.0, 0.3};
  TrainReport rep = train(obs, cfg);
  CHECK(rep.status == TrainStatus::Diverged);
  CHECK(rep.epochs == 1);
  CHECK(rep.trajectory.size() == 1);
  // The blown-up step is discarded; the report carries the last parameters
  // whose metrics were finite (here the zero initialization).
  CHECK(params_identical(rep.final_params, MixingParams{}));
}

TEST_CASE("training is deterministic") {
  SignalBatch obs = mixed_box_batch(reference_params(), 11, 0, 400);
  OptimizerConfig cfg;
  cfg.max_epochs = 40;
  cfg.gradient_tolerance = 0.0;
  TrainReport a = train(obs, cfg);
  TrainReport b = train(obs, cfg);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  CHECK(a.status == b.status);
  CHECK(params_identical(a.final_params, b.final_params));
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(params_identical(a.trajectory[i].params, b.trajectory[i].params));
    CHECK(a.trajectory[i].log_likelihood == b.trajectory[i].log_likelihood);
    CHECK(a.trajectory[i].grad_inf_norm == b.trajectory[i].grad_inf_norm);
    CHECK(a.trajectory[i].excluded == b.trajectory[i].excluded);
  }
}

TEST_CASE("the bundled defaults separate the reference scenario") {
  // Box sources mixed with strong quadratic cross-terms, recovered from a
  // cold start by kernel-score ascent under the default configuration.
  MixingParams wt = reference_params();
  Rng rng(11);  // plain seeding, matching the command-line data generator
  SignalBatch src, obs;
  for (int i = 0; i < 1000; ++i) {
    SamplePair s{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    src.push_back(s);
    obs.push_back(mix(wt, s));
  }
  OptimizerConfig cfg;  // defaults are tuned for exactly this scenario
  TrainReport rep = train(obs, cfg);
  CHECK(rep.status == TrainStatus::Converged);
  CHECK(rep.epochs <= 500);
  CHECK(param_err(rep.final_params, wt) <= 0.05);  // measured 0.0204

  ReconstructionResult rec = reconstruct_batch(rep.final_params, obs);
  SignalBatch kept_src;
  for (std::size_t i : rec.kept) kept_src.push_back(src[i]);
  SeparationMetrics m = align_and_score(rec.outputs, kept_src);
  CHECK(m.sir1_db >= 20.0);  // measured 38.96
  CHECK(m.sir2_db >= 20.0);  // measured 32.73
  CHECK_FALSE(m.swapped);
}

TEST_CASE("alignment scores perfect and affine-equivalent outputs with the sentinel") {
  Rng rng = Rng::derived(40, 0);
  SignalBatch truth;
  for (int i = 0; i < 200; ++i) {
    truth.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
  }

  SeparationMetrics exact = align_and_score(truth, truth);
  CHECK(exact.sir1_db == 350.0);
  CHECK(exact.sir2_db == 350.0);
  CHECK_FALSE(exact.swapped);

  SignalBatch affine;
  for (const SamplePair& s : truth) {
    affine.push_back({2.0 * s.first + 1.0, -0.5 * s.second + 0.25});
  }
  SeparationMetrics aff = align_and_score(affine, truth);
  // The affine fit absorbs scale and offset entirely; only rounding noise
  // remains in the residual (rounding-free cases hit the 350 dB sentinel).
  CHECK(aff.sir1_db >= 300.0);
  CHECK(aff.sir2_db >= 300.0);
  CHECK_FALSE(aff.swapped);

  SignalBatch swapped;
  for (const SamplePair& s : truth) swapped.push_back({s.second, s.first});
  SeparationMetrics sw = align_and_score(swapped, truth);
  CHECK(sw.sir1_db == 350.0);
  CHECK(sw.sir2_db == 350.0);
  CHECK(sw.swapped);
}

TEST_CASE("alignment quantifies additive noise near the expected level") {
  // Noise at 10% of the signal's spread should land near
  // 10*log10(1/0.01) = 20 dB after the affine fit.
  Rng rng = Rng::derived(41, 0);
  SignalBatch truth, noisy;
  for (int i = 0; i < 2000; ++i) {
    SamplePair s{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    truth.push_back(s);
    double sd = 0.5 / std::sqrt(3.0);  // spread of a centered box draw
    noisy.push_back({s.first + 0.1 * sd * rng.gaussian(),
                     s.second + 0.1 * sd * rng.gaussian()});
  }
  SeparationMetrics m = align_and_score(noisy, truth);
  CHECK(m.sir1_db > 18.0);
  CHECK(m.sir1_db < 23.0);
  CHECK(m.sir2_db > 18.0);
  CHECK(m.sir2_db < 23.0);
  CHECK_FALSE(m.swapped);
}

TEST_CASE("alignment validates its inputs") {
  SignalBatch a{{0.1, 0.2}, {0.3, 0.4}};
  SignalBatch b{{0.1, 0.2}};
  try {
    align_and_score(a, b);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::length_mismatch);
  }
  CHECK_THROWS_AS(align_and_score({}, {}), Error);

  SignalBatch constant{{0.5, 0.1}, {0.5, 0.2}, {0.5, 0.3}};
  SignalBatch outputs{{0.4, 0.1}, {0.6, 0.2}, {0.5, 0.3}};
  try {
    align_and_score(outputs, constant);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::zero_variance);
  }
}
