#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dslc/error.hpp"

namespace dslc::detail {

/// Shortest-round-trip-safe decimal (17 significant digits).
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot open for writing: " + path.string());
  return out;
}

/// Splits one CSV record on commas and trims surrounding blanks.
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  auto flush = [&] {
    const auto b = current.find_first_not_of(" \t\r");
    const auto e = current.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string{} : current.substr(b, e - b + 1));
    current.clear();
  };
  for (char ch : line) {
    if (ch == ',')
      flush();
    else
      current.push_back(ch);
  }
  flush();
  return fields;
}

}  // namespace dslc::detail
