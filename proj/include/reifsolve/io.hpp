#pragma once

// CSV / manifest emission. CSVs use '.' decimal, 17 significant digits and LF
// line endings so re-runs byte-reproduce.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace reif {

std::string fmt17(double x);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  size_t columns_;
};

uint64_t fnv1a64(const std::string& data);

bool make_directories(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace reif
