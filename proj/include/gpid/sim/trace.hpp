#pragma once

// CSV trace output: header row, then one row per sample, 17 significant digits.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gpid/errors.hpp"

namespace gpid::sim {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << '\n';
  }
}

inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write trace '" + path + "'");
  write_csv(f, columns, rows);
  if (!f) throw Error("write failed for '" + path + "'");
}

}  // namespace gpid::sim
