// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_CSV_HPP
#define NLROM_CSV_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlrom/errors.hpp"

namespace nlrom {

/// Float64 cell printed with 17 significant digits (lossless round-trip).
inline std::string csv_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_cell(long long v) { return std::to_string(v); }
inline std::string csv_cell(int v) { return std::to_string(v); }

class CsvWriter {
 public:
  explicit CsvWriter(const std::string &path) : os_(path, std::ios::trunc) {
    if (!os_) throw IoError("CsvWriter: cannot open " + path);
  }

  void row(const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) os_ << ',';
      os_ << cells[i];
    }
    os_ << '\n';
    if (!os_) throw IoError("CsvWriter: write failed");
  }

 private:
  std::ofstream os_;
};

/// Minimal reader for our own output (no quoting or embedded commas).
inline std::vector<std::vector<std::string>> read_csv(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_csv: cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace nlrom

#endif  // NLROM_CSV_HPP
