#include "csvio.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

namespace cli {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& where) {
  const char* begin = field.c_str();
  const char* end = begin + field.size();
  // Tolerate leading spaces; from_chars itself accepts none.
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  double value = 0.0;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw CsvError(where + ": cannot parse number '" + field + "'");
  }
  return value;
}

SignalFile read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw CsvError("cannot open '" + path + "' for reading");
  }
  SignalFile file;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string where = path + ":" + std::to_string(lineno);
    auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw CsvError(where + ": expected exactly two comma-separated fields");
    }
    std::string f1 = line.substr(0, comma);
    std::string f2 = line.substr(comma + 1);
    if (lineno == 1) {
      file.header1 = f1;
      file.header2 = f2;
      continue;
    }
    file.rows.push_back({parse_double(f1, where), parse_double(f2, where)});
  }
  if (lineno == 0) {
    throw CsvError(path + ": file is empty");
  }
  return file;
}

void write_signal_csv(const std::string& path,
                      const std::vector<lq_pair>& rows,
                      const std::string& header1,
                      const std::string& header2) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw CsvError("cannot open '" + path + "' for writing");
  }
  out << header1 << ',' << header2 << '\n';
  for (const lq_pair& row : rows) {
    out << format_double(row.first) << ',' << format_double(row.second)
        << '\n';
  }
  if (!out) {
    throw CsvError("write to '" + path + "' failed");
  }
}

}  // namespace cli
