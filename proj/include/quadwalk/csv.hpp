#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "quadwalk/errors.hpp"

namespace quadwalk {

/// Shortest round-trip decimal representation of a double (std::to_chars).
std::string format_double(double v);

/// Deterministic CSV emitter: comma separators, LF line endings, one header
/// row, doubles in shortest round-trip form.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(const std::string& s) { return s; }

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace quadwalk
