#ifndef LQSEP_TOOLS_CSVIO_HPP
#define LQSEP_TOOLS_CSVIO_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "lqsep/lqsep.h"

namespace cli {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Locale-independent, lossless text form of a double (17 significant
/// digits, round-trips bit exactly).
std::string format_double(double v);

/// Locale-independent parse; the whole field must be consumed.
/// Throws CsvError on failure.
double parse_double(const std::string& field, const std::string& where);

struct SignalFile {
  std::string header1 = "ch1";
  std::string header2 = "ch2";
  std::vector<lq_pair> rows;
};

/// Two-column CSV with a one-line header. Any parse problem reports the
/// 1-based line number.
SignalFile read_signal_csv(const std::string& path);
void write_signal_csv(const std::string& path,
                      const std::vector<lq_pair>& rows,
                      const std::string& header1 = "ch1",
                      const std::string& header2 = "ch2");

}  // namespace cli

#endif  // LQSEP_TOOLS_CSVIO_HPP
