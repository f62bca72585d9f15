#include "wavedge/modmax.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace wavedge {
namespace {

double bilinear(const Image2D& g, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, g.cols() - 1);
  const int y1 = std::min(y0 + 1, g.rows() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = g(y0, x0) * (1.0 - fx) + g(y0, x1) * fx;
  const double bottom = g(y1, x0) * (1.0 - fx) + g(y1, x1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

}  // namespace

double angle_difference(double a, double b) {
  double d = std::fmod(a - b, 2.0 * std::numbers::pi);
  if (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
  if (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
  return d;
}

std::vector<ModMax1D> detect1d(const WaveletPlane1D& plane) {
  std::vector<ModMax1D> out;
  const auto& c = plane.coeffs;
  const double floor = plane.floor();
  for (std::size_t u = 1; u + 1 < c.size(); ++u) {
    const double m = std::abs(c[u]);
    if (m > std::abs(c[u - 1]) && m >= std::abs(c[u + 1]) && m > floor) {
      out.push_back({static_cast<int>(u), plane.scale, c[u]});
    }
  }
  return out;
}

std::vector<ModMax2D> detect2d(const WaveletPlane2D& plane, NmsMode mode) {
  std::vector<ModMax2D> out;
  const Image2D& mod = plane.modulus;
  const double floor = 1e-6 * plane.max_modulus();
  for (int y = 1; y + 1 < plane.rows(); ++y) {
    for (int x = 1; x + 1 < plane.cols(); ++x) {
      const double m = mod(y, x);
      if (!(m > floor)) continue;
      const double a = plane.angle(y, x);
      double ahead, behind;
      if (mode == NmsMode::Bilinear) {
        const double dx = std::cos(a);
        const double dy = std::sin(a);
        ahead = bilinear(mod, x + dx, y + dy);
        behind = bilinear(mod, x - dx, y - dy);
      } else {
        const int dir = static_cast<int>(std::lround(a / (std::numbers::pi / 4.0))) & 7;
        ahead = mod(y + kDy[dir], x + kDx[dir]);
        behind = mod(y - kDy[dir], x - kDx[dir]);
      }
      if (m > ahead && m > behind) out.push_back({x, y, plane.scale, m, a});
    }
  }
  return out;
}

std::vector<BoundaryCurve> chain_curves(const std::vector<ModMax2D>& maxima) {
  std::vector<BoundaryCurve> curves;
  if (maxima.empty()) return curves;

  int max_x = 0, max_y = 0;
  for (const auto& m : maxima) {
    max_x = std::max(max_x, m.x);
    max_y = std::max(max_y, m.y);
  }
  const int w = max_x + 3;
  const int h = max_y + 3;
  // Grid is padded by one cell on each side so neighbour lookups never go out of range.
  std::vector<int> grid(static_cast<std::size_t>(w) * h, -1);
  auto cell = [&](int x, int y) -> int& { return grid[static_cast<std::size_t>(y + 1) * w + x + 1]; };
  for (std::size_t i = 0; i < maxima.size(); ++i) cell(maxima[i].x, maxima[i].y) = static_cast<int>(i);

  std::vector<int> order(maxima.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::tie(maxima[a].y, maxima[a].x) < std::tie(maxima[b].y, maxima[b].x);
  });

  std::vector<char> used(maxima.size(), 0);
  auto next_of = [&](int cur) {
    const ModMax2D& p = maxima[cur];
    int best = -1;
    bool best_straight = false;
    double best_diff = 0.0;
    for (int d = 0; d < 8; ++d) {
      const int cand = cell(p.x + kDx[d], p.y + kDy[d]);
      if (cand < 0 || used[cand]) continue;
      const double diff = std::abs(angle_difference(maxima[cand].angle, p.angle));
      if (!(diff < std::numbers::pi / 2.0)) continue;
      const bool straight = kDx[d] == 0 || kDy[d] == 0;
      if (best < 0 || (straight && !best_straight) || (straight == best_straight && diff < best_diff)) {
        best = cand;
        best_straight = straight;
        best_diff = diff;
      }
    }
    return best;
  };

  for (int seed : order) {
    if (used[seed]) continue;
    std::vector<int> path{seed};
    used[seed] = 1;
    for (int pass = 0; pass < 2; ++pass) {
      for (int nxt = next_of(path.back()); nxt >= 0; nxt = next_of(path.back())) {
        used[nxt] = 1;
        path.push_back(nxt);
      }
      std::reverse(path.begin(), path.end());
    }
    BoundaryCurve curve;
    curve.id = static_cast<int>(curves.size());
    curve.points.reserve(path.size());
    for (int i : path) curve.points.push_back(maxima[i]);
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace wavedge
