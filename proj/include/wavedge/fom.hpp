#pragma once

#include <vector>

#include "wavedge/detector.hpp"

namespace wavedge {

struct FomParams {
  double gamma = 0.11;
};

/// Pratt's figure of merit: (1 / max(n_truth, n_detected)) * sum 1 / (1 + gamma d^2),
/// d the Euclidean distance from each detected pixel to the nearest truth pixel.
double fom(const EdgeMap& detected, const EdgeMap& truth, const FomParams& p = {});

/// Exact Euclidean distance from every pixel to the nearest set pixel (row-major).
/// Pixels are at infinite distance when the mask is empty.
std::vector<double> distance_transform(const EdgeMap& mask);

}  // namespace wavedge
