#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "wtlab/common.hpp"

namespace wtlab {

// Shortest round-trip decimal representation.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row_text(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
};

std::string sha256_file(const std::string& path);

}  // namespace wtlab
