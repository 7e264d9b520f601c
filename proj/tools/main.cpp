// lqsep command line tool: generate test signals, mix them, separate
// mixtures by likelihood ascent, and audit every analytic derivative against
// the finite-difference oracle. All numerics go through the shared library's
// C interface; this file only does I/O and wiring.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "csvio.hpp"
#include "lqsep/lqsep.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CliError {
  int code;
  std::string message;
};

int exit_code_for(lq_status st) {
  switch (st) {
    case LQ_OK:
      return kExitOk;
    case LQ_ERR_INVALID_ARGUMENT:
      return kExitUsage;
    case LQ_ERR_TOO_FEW_SAMPLES:
    case LQ_ERR_LENGTH_MISMATCH:
      return kExitData;
    default:
      return kExitNumeric;
  }
}

void check(lq_status st, const std::string& context) {
  if (st == LQ_OK) return;
  throw CliError{exit_code_for(st), context + ": " + lq_status_name(st) +
                                        " (" + lq_last_error_message() + ")"};
}

double draw(lq_rng* rng, const cli::DistSpec& d) {
  switch (d.kind) {
    case cli::DistSpec::Uniform:
      return lq_rng_uniform(rng, d.a, d.b);
    case cli::DistSpec::Gaussian:
      return lq_rng_gaussian(rng, d.a, d.b);
    case cli::DistSpec::Laplace:
      return lq_rng_laplace(rng, d.a, d.b);
  }
  return 0.0;
}

void validate_dist(const cli::DistSpec& d, const std::string& name) {
  if (d.kind == cli::DistSpec::Uniform && !(d.a < d.b)) {
    throw CliError{kExitUsage, name + ": uniform needs a < b"};
  }
  if (d.kind != cli::DistSpec::Uniform && !(d.b > 0.0)) {
    throw CliError{kExitUsage, name + ": scale parameter must be positive"};
  }
}

struct RngHandle {
  lq_rng* rng;
  explicit RngHandle(std::uint64_t seed) : rng(lq_rng_create(seed)) {
    if (!rng) throw CliError{kExitNumeric, "rng allocation failed"};
  }
  ~RngHandle() { lq_rng_free(rng); }
  RngHandle(const RngHandle&) = delete;
  RngHandle& operator=(const RngHandle&) = delete;
};

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out.empty() ? "." : out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw CliError{kExitData,
                   "cannot create output directory '" + dir.string() + "'"};
  }
  return dir;
}

std::string fmt(double v) { return cli::format_double(v); }

// ---------------------------------------------------------------------
// generate: draw independent sources and write sources.csv

int cmd_generate(const cli::Config& cfg, const std::string& out) {
  validate_dist(cfg.source1, "source1");
  validate_dist(cfg.source2, "source2");
  fs::path dir = prepare_out_dir(out);
  RngHandle rng(cfg.seed);
  std::vector<lq_pair> rows(cfg.samples);
  for (auto& row : rows) {
    row.first = draw(rng.rng, cfg.source1);
    row.second = draw(rng.rng, cfg.source2);
  }
  fs::path path = dir / "sources.csv";
  cli::write_signal_csv(path.string(), rows);
  std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------
// mix: apply the configured mixture to a source file

int cmd_mix(const cli::Config& cfg, const std::string& input,
            const std::string& out) {
  fs::path dir = prepare_out_dir(out);
  cli::SignalFile sources = cli::read_signal_csv(input);
  if (sources.rows.empty()) {
    throw CliError{kExitData, input + ": no data rows"};
  }

  std::vector<lq_pair> mixed(sources.rows.size());
  lq_interval r1{sources.rows[0].first, sources.rows[0].first};
  lq_interval r2{sources.rows[0].second, sources.rows[0].second};
  for (std::size_t i = 0; i < sources.rows.size(); ++i) {
    check(lq_mix(cfg.mixing, sources.rows[i], &mixed[i]), "mix");
    r1.lo = std::fmin(r1.lo, sources.rows[i].first);
    r1.hi = std::fmax(r1.hi, sources.rows[i].first);
    r2.lo = std::fmin(r2.lo, sources.rows[i].second);
    r2.hi = std::fmax(r2.hi, sources.rows[i].second);
  }

  int sign_class = LQ_SIGN_MIXED;
  check(lq_classify_sign(cfg.mixing, r1, r2, &sign_class), "classify");
  const char* names[] = {"always_negative", "always_positive", "mixed_sign"};
  std::cout << "jacobian_sign_class = " << names[sign_class] << "\n";
  if (sign_class == LQ_SIGN_MIXED) {
    std::cerr << "warning: Jacobian changes sign over the source range; the "
                 "closed-form inverse branch is ambiguous there\n";
  }

  fs::path path = dir / "mixtures.csv";
  cli::write_signal_csv(path.string(), mixed);
  std::cout << "wrote " << path.string() << " (" << mixed.size()
            << " rows)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------
// separate: likelihood-ascent training plus reports

struct TrainHandle {
  lq_train_report* report = nullptr;
  ~TrainHandle() { lq_train_report_free(report); }
};

int cmd_separate(const cli::Config& cfg, const std::string& input,
                 const std::string& truth_path, const std::string& out) {
  fs::path dir = prepare_out_dir(out);
  cli::SignalFile observations = cli::read_signal_csv(input);
  std::size_t n = observations.rows.size();
  if (n == 0) {
    throw CliError{kExitData, input + ": no data rows"};
  }

  cli::SignalFile truth;
  if (!truth_path.empty()) {
    truth = cli::read_signal_csv(truth_path);
    if (truth.rows.size() != n) {
      throw CliError{kExitData, "truth file has " +
                                    std::to_string(truth.rows.size()) +
                                    " rows, observations have " +
                                    std::to_string(n)};
    }
  }

  TrainHandle train;
  check(lq_train(observations.rows.data(), n, &cfg.train, &train.report),
        "train");

  lq_params final_params{};
  int status = 0, epochs = 0;
  std::size_t traj_size = 0;
  check(lq_train_report_final_params(train.report, &final_params), "report");
  check(lq_train_report_status(train.report, &status), "report");
  check(lq_train_report_epochs(train.report, &epochs), "report");
  check(lq_train_report_trajectory_size(train.report, &traj_size), "report");

  // Reconstruct the whole batch at the final params for separated.csv.
  std::vector<lq_pair> outputs(n);
  std::vector<std::size_t> kept(n);
  std::size_t kept_count = 0;
  lq_reconstruct_stats stats{};
  bool reconstructed = false;
  {
    lq_status st = lq_reconstruct(final_params, observations.rows.data(), n,
                                  &cfg.train.recurrence, outputs.data(),
                                  kept.data(), &kept_count, &stats);
    if (st == LQ_OK) {
      reconstructed = true;
    } else {
      std::cerr << "warning: reconstruction at final params failed: "
                << lq_last_error_message() << "\n";
    }
  }

  lq_separation_metrics metrics{};
  bool have_metrics = false;
  if (reconstructed && !truth_path.empty()) {
    std::vector<lq_pair> truth_kept(kept_count);
    for (std::size_t i = 0; i < kept_count; ++i) {
      truth_kept[i] = truth.rows[kept[i]];
    }
    lq_status st = lq_align_and_score(outputs.data(), truth_kept.data(),
                                      kept_count, &metrics);
    if (st == LQ_OK) {
      have_metrics = true;
    } else {
      std::cerr << "warning: SIR evaluation failed: "
                << lq_last_error_message() << "\n";
    }
  }

  const char* status_names[] = {"converged", "max_epochs", "diverged"};
  fs::path report_path = dir / "report.txt";
  {
    std::ofstream rep(report_path, std::ios::trunc);
    if (!rep) {
      throw CliError{kExitData,
                     "cannot write '" + report_path.string() + "'"};
    }
    rep << "status = " << status_names[status] << "\n";
    rep << "epochs = " << epochs << "\n";
    rep << "gradient_variant = "
        << (cfg.train.gradient_variant == LQ_GRADIENT_CORRECTED ? "corrected"
                                                                : "legacy")
        << "\n";
    rep << "score_mode = "
        << (cfg.train.score_mode == LQ_SCORES_ANALYTIC ? "analytic" : "kernel")
        << "\n";
    rep << "samples = " << n << "\n";
    rep << "final.l1 = " << fmt(final_params.l1) << "\n";
    rep << "final.l2 = " << fmt(final_params.l2) << "\n";
    rep << "final.q1 = " << fmt(final_params.q1) << "\n";
    rep << "final.q2 = " << fmt(final_params.q2) << "\n";
    if (reconstructed) {
      rep << "kept = " << kept_count << "\n";
      rep << "dropped = " << stats.dropped << "\n";
    }
    if (have_metrics) {
      double perr = std::fmax(
          std::fmax(std::fabs(final_params.l1 - cfg.mixing.l1),
                    std::fabs(final_params.l2 - cfg.mixing.l2)),
          std::fmax(std::fabs(final_params.q1 - cfg.mixing.q1),
                    std::fabs(final_params.q2 - cfg.mixing.q2)));
      rep << "param_error_inf = " << fmt(perr) << "\n";
      rep << "sir1_db = " << fmt(metrics.sir1_db) << "\n";
      rep << "sir2_db = " << fmt(metrics.sir2_db) << "\n";
      rep << "swapped = " << metrics.swapped << "\n";
    }
    rep << "trajectory:\n";
    rep << "epoch,l1,l2,q1,q2,log_likelihood,grad_inf_norm,excluded\n";
    for (std::size_t i = 0; i < traj_size; ++i) {
      lq_epoch_record e{};
      check(lq_train_report_epoch(train.report, i, &e), "report");
      rep << i << ',' << fmt(e.params.l1) << ',' << fmt(e.params.l2) << ','
          << fmt(e.params.q1) << ',' << fmt(e.params.q2) << ','
          << fmt(e.log_likelihood) << ',' << fmt(e.grad_inf_norm) << ','
          << e.excluded << "\n";
    }
  }

  if (reconstructed) {
    std::vector<lq_pair> rows(outputs.begin(),
                              outputs.begin() +
                                  static_cast<std::ptrdiff_t>(kept_count));
    cli::write_signal_csv((dir / "separated.csv").string(), rows);
  }

  std::cout << "status = " << status_names[status] << ", epochs = " << epochs
            << ", final params = (" << fmt(final_params.l1) << ", "
            << fmt(final_params.l2) << ", " << fmt(final_params.q1) << ", "
            << fmt(final_params.q2) << ")\n";
  if (have_metrics) {
    std::cout << "SIR = (" << fmt(metrics.sir1_db) << " dB, "
              << fmt(metrics.sir2_db) << " dB)"
              << (metrics.swapped ? " [channels swapped]" : "") << "\n";
  }
  std::cout << "wrote " << report_path.string() << "\n";

  if (status == LQ_TRAIN_DIVERGED) {
    std::cerr << "error: training diverged\n";
    return kExitNumeric;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------
// gradcheck: run the finite-difference audit campaign

struct GradcheckHandle {
  lq_gradcheck_result* result = nullptr;
  ~GradcheckHandle() { lq_gradcheck_result_free(result); }
};

int cmd_gradcheck(const cli::Config& cfg, const std::string& out) {
  fs::path dir = prepare_out_dir(out);
  GradcheckHandle handle;
  check(lq_run_gradcheck(&cfg.gradcheck, &handle.result), "gradcheck");

  lq_gradcheck_summary summary{};
  check(lq_gradcheck_summary_get(handle.result, &summary), "gradcheck");

  fs::path path = dir / "gradcheck.txt";
  std::ofstream rep(path, std::ios::trunc);
  if (!rep) {
    throw CliError{kExitData, "cannot write '" + path.string() + "'"};
  }
  rep << "pass = " << summary.pass << "\n";
  rep << "cases = " << summary.cases << "\n";
  rep << "corrected_all_pass = " << summary.corrected_all_pass << "\n";
  rep << "legacy_fails_where_expected = " << summary.legacy_fails_where_expected
      << "\n";
  rep << "legacy_gap_fraction = " << fmt(summary.legacy_gap_fraction) << "\n";
  rep << "reference_point_pass = " << summary.reference_point_pass << "\n";
  rep << "seed = " << cfg.gradcheck.seed << "\n";
  rep << "step = " << fmt(cfg.gradcheck.step) << "\n";
  rep << "tolerance = " << fmt(cfg.gradcheck.tolerance) << "\n";
  rep << "linear_only = " << cfg.gradcheck.linear_only << "\n";
  rep << "cases:\n";
  rep << "index,l1,l2,q1,q2,dsdw_error,dsdw_pass,djdw_total_error,"
         "djdw_total_pass,djdw_frozen_error,djdw_frozen_expected_fail,"
         "djdw_frozen_failed,grad_corrected_error,grad_corrected_pass,"
         "grad_legacy_error,legacy_gap_expected,legacy_gap_observed\n";
  for (int i = 0; i < summary.cases; ++i) {
    lq_gradcheck_case c{};
    check(lq_gradcheck_case_get(handle.result, static_cast<std::size_t>(i), &c),
          "gradcheck");
    rep << i << ',' << fmt(c.params.l1) << ',' << fmt(c.params.l2) << ','
        << fmt(c.params.q1) << ',' << fmt(c.params.q2) << ','
        << fmt(c.dsdw_error) << ',' << c.dsdw_pass << ','
        << fmt(c.djdw_total_error) << ',' << c.djdw_total_pass << ','
        << fmt(c.djdw_frozen_error) << ',' << c.djdw_frozen_expected_fail
        << ',' << c.djdw_frozen_failed << ',' << fmt(c.grad_corrected_error)
        << ',' << c.grad_corrected_pass << ',' << fmt(c.grad_legacy_error)
        << ',' << c.legacy_gap_expected << ',' << c.legacy_gap_observed
        << "\n";
  }
  rep.close();

  std::cout << (summary.pass ? "PASS" : "FAIL") << ": " << summary.cases
            << " cases, corrected_all_pass = " << summary.corrected_all_pass
            << ", legacy_gap_fraction = " << fmt(summary.legacy_gap_fraction)
            << ", reference_point_pass = " << summary.reference_point_pass
            << "\n";
  std::cout << "wrote " << path.string() << "\n";
  if (!summary.pass) {
    std::cerr << "error: derivative audit failed\n";
    return kExitNumeric;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------
// figures: canonical scenario data sets for plotting

void write_scenario(const cli::Config& cfg, lq_rng* rng, const fs::path& dir,
                    const std::string& tag, double lo, double hi) {
  std::vector<lq_pair> sources(cfg.samples);
  for (auto& s : sources) {
    s.first = lq_rng_uniform(rng, lo, hi);
    s.second = lq_rng_uniform(rng, lo, hi);
  }
  std::vector<lq_pair> mixtures(cfg.samples);
  std::vector<lq_pair> plus(cfg.samples), minus(cfg.samples);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    check(lq_mix(cfg.mixing, sources[i], &mixtures[i]), tag + " mix");
    lq_inverse_candidates cands{};
    check(lq_direct_inverse(cfg.mixing, mixtures[i], &cands),
          tag + " inverse");
    plus[i] = cands.root_plus;
    minus[i] = cands.root_minus;
  }
  cli::write_signal_csv((dir / (tag + "_sources.csv")).string(), sources);
  cli::write_signal_csv((dir / (tag + "_mixtures.csv")).string(), mixtures);
  cli::write_signal_csv((dir / (tag + "_structure1.csv")).string(), plus);
  cli::write_signal_csv((dir / (tag + "_structure2.csv")).string(), minus);
  std::cout << "wrote " << tag << " scenario files (" << cfg.samples
            << " rows, source range [" << fmt(lo) << ", " << fmt(hi)
            << "])\n";
}

int cmd_figures(const cli::Config& cfg, const std::string& out) {
  fs::path dir = prepare_out_dir(out);
  RngHandle rng(cfg.seed);
  write_scenario(cfg, rng.rng, dir, "case2", -0.5, 0.5);
  write_scenario(cfg, rng.rng, dir, "case3", -2.0, 2.0);

  // Singular locus J = 0 inside the wide box, parameterized along the axis
  // with the larger coefficient for numerical sanity. J(s) = j0 - a1*s1 -
  // a2*s2 with [a1, a2] = -dJ/ds and j0 = J(0, 0).
  double d[2] = {0.0, 0.0};
  check(lq_djds(cfg.mixing, d), "locus");
  double a1 = -d[0], a2 = -d[1];
  double j0 = 0.0;
  check(lq_jacobian(cfg.mixing, {0.0, 0.0}, &j0), "locus");

  std::vector<lq_pair> locus;
  const double lo = -2.0, hi = 2.0;
  std::size_t m = cfg.locus_points;
  if (std::fmax(std::fabs(a1), std::fabs(a2)) > 1e-12) {
    for (std::size_t i = 0; i < m; ++i) {
      double t = lo + (hi - lo) * static_cast<double>(i) /
                          static_cast<double>(m - 1);
      lq_pair p{};
      if (std::fabs(a2) >= std::fabs(a1)) {
        p = {t, (j0 - a1 * t) / a2};
      } else {
        p = {(j0 - a2 * t) / a1, t};
      }
      double j = 0.0;
      check(lq_jacobian(cfg.mixing, p, &j), "locus");
      if (p.first >= lo && p.first <= hi && p.second >= lo && p.second <= hi &&
          std::fabs(j) <= 1e-9) {
        locus.push_back(p);
      }
    }
  }
  cli::write_signal_csv((dir / "case3_jzero.csv").string(), locus, "s1", "s2");
  std::cout << "wrote case3_jzero.csv (" << locus.size()
            << " points on the J=0 locus)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------
// stability: map the recurrence's local stability over a source grid

int cmd_stability(const cli::Config& cfg, const std::string& out) {
  fs::path dir = prepare_out_dir(out);
  if (!(cfg.stability_s1.lo <= cfg.stability_s1.hi) ||
      !(cfg.stability_s2.lo <= cfg.stability_s2.hi)) {
    throw CliError{kExitUsage, "stability region is empty"};
  }
  fs::path path = dir / "stability.csv";
  std::ofstream outf(path, std::ios::trunc);
  if (!outf) {
    throw CliError{kExitData, "cannot write '" + path.string() + "'"};
  }
  outf << "s1,s2,magnitude1,magnitude2,locally_stable\n";
  int grid = cfg.stability_grid;
  long stable = 0, total = 0;
  for (int i = 0; i < grid; ++i) {
    double s1 = cfg.stability_s1.lo +
                (cfg.stability_s1.hi - cfg.stability_s1.lo) *
                    static_cast<double>(i) / static_cast<double>(grid - 1);
    for (int k = 0; k < grid; ++k) {
      double s2 = cfg.stability_s2.lo +
                  (cfg.stability_s2.hi - cfg.stability_s2.lo) *
                      static_cast<double>(k) / static_cast<double>(grid - 1);
      lq_stability_report rep{};
      check(lq_stability_at(cfg.mixing, {s1, s2}, &rep), "stability");
      outf << fmt(s1) << ',' << fmt(s2) << ',' << fmt(rep.magnitude1) << ','
           << fmt(rep.magnitude2) << ',' << rep.locally_stable << "\n";
      stable += rep.locally_stable;
      ++total;
    }
  }
  outf.close();
  std::cout << "stable fraction = " << fmt(static_cast<double>(stable) /
                                           static_cast<double>(total))
            << " (" << stable << "/" << total << ")\n";
  std::cout << "wrote " << path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonArgs& args, bool with_seed) {
  sub->add_option("--config", args.config_path,
                  "configuration file (key = value lines)");
  sub->add_option("--out", args.out, "output directory (default .)");
  if (with_seed) {
    sub->add_option("--seed", args.seed, "override the configured seed");
  }
}

cli::Config resolve_config(const CommonArgs& args) {
  cli::Config cfg =
      args.config_path.empty() ? cli::Config() : cli::load_config(args.config_path);
  if (args.seed) {
    cfg.seed = *args.seed;
    cfg.gradcheck.seed = *args.seed;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blind separation of linear-quadratic two-source mixtures"};
  app.require_subcommand(1);

  CommonArgs gen_args, mix_args, sep_args, grad_args, fig_args, stab_args;
  std::string mix_input, sep_input, sep_truth;
  std::string sep_gradient, sep_scores;

  CLI::App* gen = app.add_subcommand("generate", "draw source signals");
  add_common(gen, gen_args, true);

  CLI::App* mixc = app.add_subcommand("mix", "apply the mixture to sources");
  mixc->add_option("sources", mix_input, "source CSV file")->required();
  add_common(mixc, mix_args, false);

  CLI::App* sep = app.add_subcommand("separate", "train the separator");
  sep->add_option("mixtures", sep_input, "observation CSV file")->required();
  sep->add_option("--truth", sep_truth, "true sources for SIR evaluation");
  sep->add_option("--gradient", sep_gradient, "gradient variant")
      ->check(CLI::IsMember({"corrected", "legacy"}));
  sep->add_option("--scores", sep_scores, "score model")
      ->check(CLI::IsMember({"analytic", "kernel"}));
  add_common(sep, sep_args, false);

  CLI::App* grad = app.add_subcommand("gradcheck",
                                      "audit derivatives against the oracle");
  add_common(grad, grad_args, true);

  CLI::App* fig = app.add_subcommand("figures", "canonical scenario data");
  add_common(fig, fig_args, true);

  CLI::App* stab = app.add_subcommand("stability", "recurrence stability map");
  add_common(stab, stab_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      return cmd_generate(resolve_config(gen_args), gen_args.out);
    }
    if (mixc->parsed()) {
      return cmd_mix(resolve_config(mix_args), mix_input, mix_args.out);
    }
    if (sep->parsed()) {
      cli::Config cfg = resolve_config(sep_args);
      if (sep_gradient == "corrected") {
        cfg.train.gradient_variant = LQ_GRADIENT_CORRECTED;
      } else if (sep_gradient == "legacy") {
        cfg.train.gradient_variant = LQ_GRADIENT_LEGACY;
      }
      if (sep_scores == "analytic") {
        cfg.train.score_mode = LQ_SCORES_ANALYTIC;
      } else if (sep_scores == "kernel") {
        cfg.train.score_mode = LQ_SCORES_KERNEL;
      }
      return cmd_separate(cfg, sep_input, sep_truth, sep_args.out);
    }
    if (grad->parsed()) {
      return cmd_gradcheck(resolve_config(grad_args), grad_args.out);
    }
    if (fig->parsed()) {
      return cmd_figures(resolve_config(fig_args), fig_args.out);
    }
    if (stab->parsed()) {
      return cmd_stability(resolve_config(stab_args), stab_args.out);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cli::CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
