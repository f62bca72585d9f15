#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "wavedge/signal.hpp"

namespace wavedge::testing {

inline Signal1D step_signal(int n, int at, double low = 0.0, double high = 1.0) {
  std::vector<double> v(n, low);
  for (int i = at; i < n; ++i) v[i] = high;
  return Signal1D(std::move(v));
}

// Left part (x < col) at `low`, the rest at `high`.
inline Image2D vertical_step(int rows, int cols, int col, double low = 0.0, double high = 1.0) {
  Image2D img(rows, cols, low);
  for (int r = 0; r < rows; ++r) {
    for (int c = col; c < cols; ++c) img(r, c) = high;
  }
  return img;
}

// Peak of the transform of a unit step: sqrt(2s) pi^{-1/4}.
inline double step_peak(double s) { return std::sqrt(2.0 * s) * std::pow(M_PI, -0.25); }

inline std::filesystem::path scratch_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "wavedge_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace wavedge::testing
