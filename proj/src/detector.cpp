#include "wavedge/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace wavedge {
namespace {

double weight_at(const ScaleWeight& w, double s) { return w ? w(s) : 1.0; }

template <class Line>
double line_relevance(const Line& line, const ScaleWeight& weight) {
  double r = 0.0;
  for (const auto& e : line.entries) r += weight_at(weight, e.scale) * std::abs(e.value);
  return r;
}

std::vector<std::size_t> select(const std::vector<double>& values, const std::optional<double>& threshold) {
  if (!threshold) return auto_threshold(values);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > *threshold) out.push_back(i);
  }
  return out;
}

}  // namespace

void DetectorParams::validate() const {
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    throw std::invalid_argument("DetectorParams: subsample_fraction must be in (0, 1]");
  }
  if (threshold && !(*threshold > 0.0)) throw std::invalid_argument("DetectorParams: threshold must be > 0");
}

std::size_t EdgeMap::count() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }

Image2D EdgeMap::to_image() const {
  std::vector<double> px(mask.begin(), mask.end());
  return Image2D(rows, cols, std::move(px));
}

EdgeMap edge_map_from_image(const Image2D& img) {
  EdgeMap out(img.rows(), img.cols());
  for (int r = 0; r < img.rows(); ++r) {
    for (int c = 0; c < img.cols(); ++c) {
      if (img(r, c) != 0.0) out.set(r, c);
    }
  }
  return out;
}

double relevance(const MaximaLine1D& line, const ScaleWeight& weight) { return line_relevance(line, weight); }
double relevance(const MaximaLine2D& line, const ScaleWeight& weight) { return line_relevance(line, weight); }

double curve_score(const BoundaryCurve& curve, const std::vector<double>& sampled_relevance) {
  if (curve.points.empty()) throw std::invalid_argument("curve_score: empty curve");
  if (sampled_relevance.empty()) throw std::invalid_argument("curve_score: empty sample");
  const double mean = std::accumulate(sampled_relevance.begin(), sampled_relevance.end(), 0.0) /
                      static_cast<double>(sampled_relevance.size());
  return static_cast<double>(curve.points.size()) * mean;
}

double traced_relevance(const ScaleStack2D& stack, int index, const ScaleWeight& weight) {
  std::size_t level = stack.levels() - 1;
  const ModMax2D& start = stack.maxima(level)[index];
  double r = weight_at(weight, start.scale) * start.value;
  for (int m = index; level > 0; --level) {
    m = stack.parent(level, m);
    if (m < 0) break;
    const ModMax2D& e = stack.maxima(level - 1)[m];
    r += weight_at(weight, e.scale) * e.value;
  }
  return r;
}

std::vector<std::size_t> auto_threshold(const std::vector<double>& values) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (order.size() < 2) return order;
  // Edges are the minority, so the split is searched among the upper half only;
  // the sparse tail of tiny scores otherwise produces the widest gaps.
  const std::size_t upper = std::max<std::size_t>(2, (order.size() + 1) / 2);
  std::size_t cut = order.size();
  double widest = 0.0;
  for (std::size_t k = 0; k + 1 < upper; ++k) {
    const double gap = std::log(values[order[k]]) - std::log(values[order[k + 1]]);
    if (gap > widest) {
      widest = gap;
      cut = k + 1;
    }
  }
  order.resize(cut);
  return order;
}

std::vector<CurveScore> score_curves(const ScaleStack2D& stack, const DetectorParams& params) {
  params.validate();
  std::vector<CurveScore> out;
  if (stack.levels() == 0) return out;
  const auto& finest = stack.maxima(stack.levels() - 1);
  // Chains carry copies of the mod-max; map positions back to stack indices.
  std::vector<int> index_of;
  int cols = 0;
  for (const auto& m : finest) cols = std::max(cols, m.x + 1);
  int rows = 0;
  for (const auto& m : finest) rows = std::max(rows, m.y + 1);
  index_of.assign(static_cast<std::size_t>(rows) * cols, -1);
  for (std::size_t i = 0; i < finest.size(); ++i) {
    index_of[static_cast<std::size_t>(finest[i].y) * cols + finest[i].x] = static_cast<int>(i);
  }

  for (auto& curve : chain_curves(finest)) {
    const std::size_t n = curve.points.size();
    const auto k = static_cast<std::size_t>(std::ceil(params.subsample_fraction * static_cast<double>(n)));
    std::vector<std::size_t> picks(n);
    std::iota(picks.begin(), picks.end(), 0);
    if (k < n) {
      std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                        static_cast<std::uint32_t>(curve.id)};
      std::mt19937_64 rng(seq);
      // Partial Fisher-Yates keeps the draw independent of the standard library's std::sample.
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(picks[i], picks[pick(rng)]);
      }
      picks.resize(k);
    }
    std::vector<double> sampled;
    sampled.reserve(picks.size());
    for (std::size_t p : picks) {
      const auto& pt = curve.points[p];
      sampled.push_back(traced_relevance(stack, index_of[static_cast<std::size_t>(pt.y) * cols + pt.x],
                                         params.weight));
    }
    const double s = curve_score(curve, sampled);
    out.push_back({std::move(curve), s});
  }
  return out;
}

EdgeMap detect_1d(const Signal1D& signal, const ScaleSchedule& sched, const DecisionParams& dparams,
                  const DetectorParams& params) {
  params.validate();
  EdgeMap out(1, static_cast<int>(signal.size()));
  const auto lines = filter_schedule(signal, sched, dparams);
  std::vector<const MaximaLine1D*> reaching;
  std::vector<double> scores;
  for (const auto& line : lines) {
    if (line.merged_into >= 0 || line.finest().scale != sched.finest()) continue;
    reaching.push_back(&line);
    scores.push_back(relevance(line, params.weight));
  }
  for (std::size_t i : select(scores, params.threshold)) {
    out.set(0, reaching[i]->finest().pos);
    out.accepted.push_back({reaching[i]->id, scores[i]});
  }
  return out;
}

EdgeMap detect_2d(const Image2D& image, const ScaleSchedule& sched, const DecisionParams& dparams,
                  const DetectorParams& params) {
  params.validate();
  EdgeMap out(image.rows(), image.cols());
  const ScaleStack2D stack(image, sched, dparams);
  const auto curves = score_curves(stack, params);
  std::vector<double> scores;
  for (const auto& c : curves) scores.push_back(c.score);
  for (std::size_t i : select(scores, params.threshold)) {
    for (const auto& p : curves[i].curve.points) out.set(p.y, p.x);
    out.accepted.push_back({curves[i].curve.id, curves[i].score});
  }
  return out;
}

EdgeMap canny_baseline(const Image2D& image, double s, double low, double high) {
  if (!(low > 0.0) || !(high >= low)) throw std::invalid_argument("canny_baseline: need 0 < low <= high");
  const WaveletPlane2D plane = cwt2d(image, s);
  const auto maxima = detect2d(plane);
  EdgeMap out(image.rows(), image.cols());
  const double peak = plane.max_modulus();
  const double t_low = low * peak;
  const double t_high = high * peak;

  std::vector<double> strength(static_cast<std::size_t>(image.rows()) * image.cols(), -1.0);
  for (const auto& m : maxima) {
    if (m.value >= t_low) strength[static_cast<std::size_t>(m.y) * image.cols() + m.x] = m.value;
  }
  std::vector<int> stack;
  for (const auto& m : maxima) {
    if (m.value < t_high || out.at(m.y, m.x)) continue;
    out.set(m.y, m.x);
    stack.push_back(m.y * image.cols() + m.x);
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const int y = cur / image.cols(), x = cur % image.cols();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || nx < 0 || ny >= image.rows() || nx >= image.cols()) continue;
          if (strength[static_cast<std::size_t>(ny) * image.cols() + nx] < 0.0 || out.at(ny, nx)) continue;
          out.set(ny, nx);
          stack.push_back(ny * image.cols() + nx);
        }
      }
    }
  }
  return out;
}

}  // namespace wavedge
