#ifndef LQSEP_TOOLS_CONFIG_HPP
#define LQSEP_TOOLS_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "lqsep/lqsep.h"

namespace cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DistSpec {
  enum Kind { Uniform, Gaussian, Laplace } kind = Uniform;
  // Meaning depends on kind: uniform -> (lo, hi), gaussian -> (mean, stddev),
  // laplace -> (mean, scale).
  double a = -0.5;
  double b = 0.5;
};

/// Everything the subcommands can be told through a config file. Values not
/// present in the file keep these defaults.
struct Config {
  std::uint64_t seed = 11;
  std::size_t samples = 1000;
  DistSpec source1;
  DistSpec source2;
  lq_params mixing{-0.2, 0.2, -0.8, 0.8};

  lq_train_config train;          // optimizer.* and recurrence.* keys
  lq_gradcheck_config gradcheck;  // gradcheck.* keys (seed mirrors `seed`)

  std::size_t locus_points = 401;  // figures: singular-locus sampling density
  int stability_grid = 21;         // stability: points per axis
  lq_interval stability_s1{-0.5, 0.5};
  lq_interval stability_s2{-0.5, 0.5};

  Config();
};

/// Key = value file, one pair per line, '#' comments. Unknown keys and
/// malformed values are errors that name the offending line.
Config load_config(const std::string& path);

/// Apply one key/value pair (exposed for the loader and for tests).
void apply_config_entry(Config& cfg, const std::string& key,
                        const std::string& value, const std::string& where);

}  // namespace cli

#endif  // LQSEP_TOOLS_CONFIG_HPP
