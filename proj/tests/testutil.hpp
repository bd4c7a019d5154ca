#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testutil {

/// Two-sided finite difference of f with respect to *p.
template <class F>
double central_diff(F&& f, double* p, double h = 1e-5) {
  const double orig = *p;
  *p = orig + h;
  const double up = f();
  *p = orig - h;
  const double dn = f();
  *p = orig;
  return (up - dn) / (2.0 * h);
}

inline double rel_err(double a, double fd) {
  return std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Scratch directory for artifacts a test writes and rereads.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "nameres_tests" / name;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
