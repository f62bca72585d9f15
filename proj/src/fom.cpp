#include "wavedge/fom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wavedge {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas: squared distances along one line.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    while (k >= 0) {
      const double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInf : ((f[q] + double(q) * q) - (f[v[k - 1]] + double(v[k - 1]) * v[k - 1])) /
                                (2.0 * (q - v[k - 1]));
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    d[q] = double(q - v[j]) * (q - v[j]) + f[v[j]];
  }
}

}  // namespace

std::vector<double> distance_transform(const EdgeMap& mask) {
  const int rows = mask.rows, cols = mask.cols;
  std::vector<double> g(static_cast<std::size_t>(rows) * cols);
  const int n = std::max(rows, cols);
  std::vector<double> f, d;
  std::vector<int> v(n);
  std::vector<double> z(n + 1);

  f.resize(rows);
  d.resize(rows);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) f[r] = mask.at(r, c) ? 0.0 : kInf;
    edt_1d(f, d, v, z);
    for (int r = 0; r < rows; ++r) g[static_cast<std::size_t>(r) * cols + c] = d[r];
  }
  f.resize(cols);
  d.resize(cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) f[c] = g[static_cast<std::size_t>(r) * cols + c];
    edt_1d(f, d, v, z);
    for (int c = 0; c < cols; ++c) g[static_cast<std::size_t>(r) * cols + c] = std::sqrt(d[c]);
  }
  return g;
}

double fom(const EdgeMap& detected, const EdgeMap& truth, const FomParams& p) {
  if (detected.rows != truth.rows || detected.cols != truth.cols) {
    throw std::invalid_argument("fom: detected and truth maps differ in shape");
  }
  if (!(p.gamma > 0.0)) throw std::invalid_argument("fom: gamma must be > 0");
  const std::size_t n_truth = truth.count();
  if (n_truth == 0) throw std::invalid_argument("fom: truth map is empty");
  const auto dist = distance_transform(truth);
  double sum = 0.0;
  std::size_t n_detected = 0;
  for (std::size_t i = 0; i < detected.mask.size(); ++i) {
    if (!detected.mask[i]) continue;
    ++n_detected;
    sum += 1.0 / (1.0 + p.gamma * dist[i] * dist[i]);
  }
  return sum / static_cast<double>(std::max(n_truth, n_detected));
}

}  // namespace wavedge
