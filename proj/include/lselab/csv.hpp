#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace lselab {

/// Decimal form with 17 significant digits (round-trip safe for doubles).
std::string csv_number(double v);

/// Minimal CSV emitter: mandatory header row, LF line endings, numbers
/// formatted with csv_number.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void row_numbers(const std::vector<double>& cells);

 private:
  std::ofstream out_;
  size_t width_;
};

}  // namespace lselab
