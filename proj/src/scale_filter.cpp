#include "wavedge/scale_filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace wavedge {
namespace {

double distance(const ModMax1D& a, const ModMax1D& b) { return std::abs(a.pos - b.pos); }
double distance(const ModMax2D& a, const ModMax2D& b) { return std::hypot(double(a.x - b.x), double(a.y - b.y)); }

double score(const ModMax1D& n, const ModMax1D& m, const DecisionParams& p) { return decision_1d(n, m, p); }
double score(const ModMax2D& n, const ModMax2D& m, const DecisionParams& p) { return decision_2d(n, m, p); }

void check_params(const DecisionParams& p) {
  if (!(p.window_factor > 0.0)) throw std::invalid_argument("DecisionParams: window_factor must be > 0");
}

// Argmax over `candidates` (indices into fine); -1 when none scores above zero.
template <class MaxT>
int best_candidate(const MaxT& n, const std::vector<MaxT>& fine, const std::vector<int>& candidates,
                   const DecisionParams& p) {
  int best = -1;
  double best_p = 0.0, best_d = 0.0;
  for (int m : candidates) {
    const double pm = score(n, fine[m], p);
    if (!(pm > 0.0)) continue;
    const double dm = distance(n, fine[m]);
    if (best < 0 || pm > best_p || (pm == best_p && (dm < best_d || (dm == best_d && m < best)))) {
      best = m;
      best_p = pm;
      best_d = dm;
    }
  }
  return best;
}

// Links per-level mod-max into lines given each level's choices.
template <class MaxT, class ChoiceFn>
std::vector<MaximaLine<MaxT>> assemble(const std::vector<std::vector<MaxT>>& levels, ChoiceFn choice,
                                       const DecisionParams& p) {
  std::vector<MaximaLine<MaxT>> lines;
  if (levels.empty()) return lines;
  auto start = [&](const MaxT& m) {
    lines.push_back({static_cast<int>(lines.size()), {m}, -1});
    return static_cast<int>(lines.size()) - 1;
  };

  std::vector<int> line_of;
  for (const auto& m : levels[0]) line_of.push_back(start(m));

  for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
    const auto& coarse = levels[l];
    const auto& fine = levels[l + 1];
    std::vector<int> owner(fine.size(), -1);
    std::vector<double> owner_p(fine.size(), 0.0);
    std::vector<int> chosen(coarse.size());
    for (std::size_t n = 0; n < coarse.size(); ++n) {
      const int m = chosen[n] = choice(l, static_cast<int>(n));
      if (m < 0) continue;
      const double pm = score(coarse[n], fine[m], p);
      if (owner[m] < 0 || pm > owner_p[m]) {
        owner[m] = static_cast<int>(n);
        owner_p[m] = pm;
      }
    }
    std::vector<int> next(fine.size(), -1);
    for (std::size_t n = 0; n < coarse.size(); ++n) {
      const int m = chosen[n];
      if (m < 0) continue;
      auto& line = lines[line_of[n]];
      line.entries.push_back(fine[m]);
      if (owner[m] == static_cast<int>(n)) {
        next[m] = line_of[n];
      }
    }
    for (std::size_t n = 0; n < coarse.size(); ++n) {
      const int m = chosen[n];
      if (m >= 0 && owner[m] != static_cast<int>(n)) lines[line_of[n]].merged_into = line_of[owner[m]];
    }
    for (std::size_t m = 0; m < fine.size(); ++m) {
      if (next[m] < 0) next[m] = start(fine[m]);
    }
    line_of = std::move(next);
  }
  return lines;
}

}  // namespace

std::vector<int> connect(const std::vector<ModMax1D>& coarse, const std::vector<ModMax1D>& fine,
                         const DecisionParams& p) {
  check_params(p);
  std::vector<int> out(coarse.size(), -1);
  if (fine.empty()) return out;
  const double radius = p.window_factor * fine.front().scale;
  // Fine mod-max are sorted by position, so each window is a contiguous range.
  std::vector<int> candidates;
  for (std::size_t n = 0; n < coarse.size(); ++n) {
    candidates.clear();
    auto lo = std::lower_bound(fine.begin(), fine.end(), coarse[n].pos - radius,
                               [](const ModMax1D& m, double v) { return m.pos < v; });
    for (auto it = lo; it != fine.end() && it->pos <= coarse[n].pos + radius; ++it) {
      candidates.push_back(static_cast<int>(it - fine.begin()));
    }
    out[n] = best_candidate(coarse[n], fine, candidates, p);
  }
  return out;
}

std::vector<int> connect(const std::vector<ModMax2D>& coarse, const std::vector<ModMax2D>& fine,
                         const DecisionParams& p) {
  check_params(p);
  std::vector<int> out(coarse.size(), -1);
  if (fine.empty()) return out;
  const double radius = p.window_factor * fine.front().scale;
  std::vector<int> candidates;
  for (std::size_t n = 0; n < coarse.size(); ++n) {
    candidates.clear();
    for (std::size_t m = 0; m < fine.size(); ++m) {
      if (distance(coarse[n], fine[m]) <= radius) candidates.push_back(static_cast<int>(m));
    }
    out[n] = best_candidate(coarse[n], fine, candidates, p);
  }
  return out;
}

std::vector<MaximaLine1D> filter_schedule(const Signal1D& source, const ScaleSchedule& sched,
                                          const DecisionParams& p) {
  check_params(p);
  std::vector<std::vector<ModMax1D>> levels;
  for (double s : sched.scales()) levels.push_back(detect1d(cwt1d(source, s)));
  std::vector<std::vector<int>> choices;
  for (std::size_t l = 0; l + 1 < levels.size(); ++l) choices.push_back(connect(levels[l], levels[l + 1], p));
  return assemble(levels, [&](std::size_t l, int n) { return choices[l][n]; }, p);
}

std::vector<MaximaLine2D> filter_schedule(const Image2D& source, const ScaleSchedule& sched,
                                          const DecisionParams& p, NmsMode mode) {
  const ScaleStack2D stack(source, sched, p, mode);
  std::vector<std::vector<ModMax2D>> levels;
  for (std::size_t l = 0; l < stack.levels(); ++l) levels.push_back(stack.maxima(l));
  return assemble(levels, [&](std::size_t l, int n) { return stack.choice(l, n); }, p);
}

ScaleStack2D::ScaleStack2D(const Image2D& image, const ScaleSchedule& sched, const DecisionParams& p,
                           NmsMode mode)
    : params_(p) {
  check_params(p);
  for (double s : sched.scales()) {
    scales_.push_back(s);
    maxima_.push_back(detect2d(cwt2d(image, s), mode));
    choice_.emplace_back(maxima_.back().size(), -2);

    Buckets b;
    b.size = std::max(1.0, p.window_factor * s);
    b.nx = static_cast<int>(image.cols() / b.size) + 1;
    b.ny = static_cast<int>(image.rows() / b.size) + 1;
    b.cells.resize(static_cast<std::size_t>(b.nx) * b.ny);
    const auto& mx = maxima_.back();
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const int cx = static_cast<int>(mx[i].x / b.size);
      const int cy = static_cast<int>(mx[i].y / b.size);
      b.cells[static_cast<std::size_t>(cy) * b.nx + cx].push_back(static_cast<int>(i));
    }
    buckets_.push_back(std::move(b));
  }
}

std::vector<int> ScaleStack2D::within(std::size_t level, double x, double y, double radius) const {
  const Buckets& b = buckets_[level];
  const auto& mx = maxima_[level];
  std::vector<int> out;
  const int reach = static_cast<int>(std::ceil(radius / b.size));
  const int cx = static_cast<int>(x / b.size);
  const int cy = static_cast<int>(y / b.size);
  for (int gy = std::max(0, cy - reach); gy <= std::min(b.ny - 1, cy + reach); ++gy) {
    for (int gx = std::max(0, cx - reach); gx <= std::min(b.nx - 1, cx + reach); ++gx) {
      for (int i : b.cells[static_cast<std::size_t>(gy) * b.nx + gx]) {
        if (std::hypot(mx[i].x - x, mx[i].y - y) <= radius) out.push_back(i);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int ScaleStack2D::choice(std::size_t level, int n) const {
  if (level + 1 >= levels()) return -1;
  int& c = choice_[level][n];
  if (c == -2) {
    const ModMax2D& m = maxima_[level][n];
    const auto candidates = within(level + 1, m.x, m.y, params_.window_factor * scales_[level + 1]);
    c = best_candidate(m, maxima_[level + 1], candidates, params_);
  }
  return c;
}

int ScaleStack2D::parent(std::size_t level, int m) const {
  if (level == 0) return -1;
  const ModMax2D& fine = maxima_[level][m];
  int best = -1;
  double best_p = 0.0;
  bool best_chose = false;
  for (int n : within(level - 1, fine.x, fine.y, params_.window_factor * scales_[level])) {
    const int c = choice(level - 1, n);
    const bool chose = c == m;
    if (c < 0) continue;
    if (!chose && (std::abs(maxima_[level][c].x - fine.x) > 1 || std::abs(maxima_[level][c].y - fine.y) > 1)) continue;
    const double pn = decision_2d(maxima_[level - 1][n], fine, params_);
    if (!chose && !(pn > 0.0)) continue;
    if (best < 0 || (chose && !best_chose) || (chose == best_chose && pn > best_p)) {
      best = n;
      best_p = pn;
      best_chose = chose;
    }
  }
  return best;
}

std::vector<MaximaLine1D> edge_focusing_oracle(const Signal1D& source, double s_max, double s_min) {
  if (!(s_min >= 1.0) || !(s_max > s_min)) {
    throw std::invalid_argument("edge_focusing_oracle: need s_max > s_min >= 1");
  }
  std::vector<std::vector<ModMax1D>> levels;
  const int steps = static_cast<int>(std::floor((s_max - s_min) / 0.5 + 1e-9));
  for (int k = 0; k <= steps; ++k) levels.push_back(detect1d(cwt1d(source, s_max - 0.5 * k)));

  std::vector<MaximaLine1D> lines;
  std::vector<int> line_of;
  for (const auto& m : levels[0]) {
    line_of.push_back(static_cast<int>(lines.size()));
    lines.push_back({static_cast<int>(lines.size()), {m}, -1});
  }
  for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
    const auto& coarse = levels[l];
    const auto& fine = levels[l + 1];
    const int window = std::max(2, static_cast<int>(std::ceil(coarse.empty() ? 0.0 : coarse[0].scale / 4.0)));
    std::vector<int> claim(fine.size(), -1);
    std::vector<int> claim_dist(fine.size(), 0);
    for (std::size_t n = 0; n < coarse.size(); ++n) {
      int best = -1;
      for (std::size_t m = 0; m < fine.size(); ++m) {
        const int d = std::abs(fine[m].pos - coarse[n].pos);
        if (d > window || fine[m].sign() != coarse[n].sign()) continue;
        if (best < 0) {
          best = static_cast<int>(m);
          continue;
        }
        const int bd = std::abs(fine[best].pos - coarse[n].pos);
        if (d < bd || (d == bd && std::abs(fine[m].value) > std::abs(fine[best].value))) best = static_cast<int>(m);
      }
      if (best < 0) continue;
      const int d = std::abs(fine[best].pos - coarse[n].pos);
      const int prev = claim[best];
      if (prev < 0 || d < claim_dist[best] ||
          (d == claim_dist[best] && std::abs(coarse[n].value) > std::abs(coarse[prev].value))) {
        claim[best] = static_cast<int>(n);
        claim_dist[best] = d;
      }
    }
    std::vector<int> next(fine.size(), -1);
    for (std::size_t m = 0; m < fine.size(); ++m) {
      if (claim[m] >= 0) {
        next[m] = line_of[claim[m]];
        lines[next[m]].entries.push_back(fine[m]);
      } else {
        next[m] = static_cast<int>(lines.size());
        lines.push_back({static_cast<int>(lines.size()), {fine[m]}, -1});
      }
    }
    line_of = std::move(next);
  }
  return lines;
}

double PairStats::false_percent() const {
  return connections == 0 ? 0.0 : 100.0 * static_cast<double>(false_connections) / connections;
}

double PairStats::mean_displacement() const {
  return false_connections == 0 ? 0.0 : displacement_sum / static_cast<double>(false_connections);
}

PairStats ConnectionReport::overall() const {
  PairStats all;
  if (!pairs.empty()) {
    all.coarse = pairs.front().coarse;
    all.fine = pairs.back().fine;
  }
  for (const auto& p : pairs) {
    all.connections += p.connections;
    all.false_connections += p.false_connections;
    all.displacement_sum += p.displacement_sum;
  }
  return all;
}

void ConnectionReport::merge(const ConnectionReport& other) {
  if (pairs.empty()) {
    pairs = other.pairs;
    return;
  }
  if (other.pairs.empty()) return;
  if (other.pairs.size() != pairs.size()) throw std::invalid_argument("ConnectionReport::merge: scale pairs differ");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].coarse != other.pairs[i].coarse || pairs[i].fine != other.pairs[i].fine) {
      throw std::invalid_argument("ConnectionReport::merge: scale pairs differ");
    }
    pairs[i].connections += other.pairs[i].connections;
    pairs[i].false_connections += other.pairs[i].false_connections;
    pairs[i].displacement_sum += other.pairs[i].displacement_sum;
  }
}

ConnectionReport audit(const std::vector<MaximaLine1D>& sparse, const std::vector<MaximaLine1D>& truth) {
  // Truth lookup keyed by (scale, position); scales are multiples of 1/2.
  auto key = [](double scale, int pos) { return std::pair<long, int>(std::lround(scale * 2.0), pos); };
  std::map<std::pair<long, int>, int> truth_line;
  std::map<std::pair<long, int>, int> truth_pos;  // (line id, scale) -> position
  for (const auto& line : truth) {
    for (const auto& e : line.entries) {
      truth_line[key(e.scale, e.pos)] = line.id;
      truth_pos[{std::lround(e.scale * 2.0), line.id}] = e.pos;
    }
  }

  std::vector<double> scales;
  for (const auto& line : sparse) {
    for (const auto& e : line.entries) scales.push_back(e.scale);
  }
  std::sort(scales.begin(), scales.end(), std::greater<>());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());

  ConnectionReport report;
  std::map<long, std::size_t> pair_of;  // coarse scale key -> index
  for (std::size_t i = 0; i + 1 < scales.size(); ++i) {
    report.pairs.push_back({scales[i], scales[i + 1], 0, 0, 0.0});
    pair_of[std::lround(scales[i] * 2.0)] = i;
  }

  auto lookup = [&](const ModMax1D& m) {
    auto it = truth_line.find(key(m.scale, m.pos));
    if (it == truth_line.end()) {
      throw std::invalid_argument("audit: mod-max at scale " + std::to_string(m.scale) + ", position " +
                                  std::to_string(m.pos) + " is not in the reference");
    }
    return it->second;
  };

  for (const auto& line : sparse) {
    for (std::size_t i = 0; i + 1 < line.entries.size(); ++i) {
      const ModMax1D& n = line.entries[i];
      const ModMax1D& m = line.entries[i + 1];
      auto pit = pair_of.find(std::lround(n.scale * 2.0));
      if (pit == pair_of.end() || report.pairs[pit->second].fine != m.scale) {
        throw std::invalid_argument("audit: connection skips a schedule scale");
      }
      PairStats& stats = report.pairs[pit->second];
      ++stats.connections;
      const int ln = lookup(n);
      if (ln == lookup(m)) continue;
      ++stats.false_connections;
      auto tp = truth_pos.find({std::lround(m.scale * 2.0), ln});
      const int expected = tp != truth_pos.end() ? tp->second : n.pos;
      stats.displacement_sum += std::abs(m.pos - expected);
    }
  }
  return report;
}

}  // namespace wavedge
