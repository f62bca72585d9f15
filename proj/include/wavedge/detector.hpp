#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "wavedge/scale_filter.hpp"

namespace wavedge {

/// Scale weight mu(s) applied to |W| in the relevance sum.
using ScaleWeight = std::function<double(double)>;

struct DetectorParams {
  /// Fixed threshold T; empty selects the automatic split at the largest gap in ln S.
  std::optional<double> threshold;
  /// Fraction of each curve's points traced through the scales, in (0, 1].
  double subsample_fraction = 1.0;
  std::uint64_t seed = 0;
  /// Empty means mu = 1.
  ScaleWeight weight;

  void validate() const;
};

struct Accepted {
  int id;
  double score;
};

/// Binary edge mask plus the ids and scores of the accepted lines or curves.
struct EdgeMap {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> mask;
  std::vector<Accepted> accepted;

  EdgeMap() = default;
  EdgeMap(int r, int c) : rows(r), cols(c), mask(static_cast<std::size_t>(r) * c, 0) {}

  bool at(int r, int c) const { return mask[static_cast<std::size_t>(r) * cols + c] != 0; }
  void set(int r, int c) { mask[static_cast<std::size_t>(r) * cols + c] = 1; }
  std::size_t count() const;
  Image2D to_image() const;
};

/// Nonzero pixels of `img` become edges.
EdgeMap edge_map_from_image(const Image2D& img);

/// R = sum over entries of mu(s) |W|.
double relevance(const MaximaLine1D& line, const ScaleWeight& weight = {});
double relevance(const MaximaLine2D& line, const ScaleWeight& weight = {});

/// S = (point count) * mean of the sampled relevances.
double curve_score(const BoundaryCurve& curve, const std::vector<double>& sampled_relevance);

/// Relevance of finest-scale mod-max `index` (the last level of `stack`), found by
/// following the highest-scoring parents upward. A trace that ends early keeps its partial sum.
double traced_relevance(const ScaleStack2D& stack, int index, const ScaleWeight& weight = {});

/// Indices of the values above the largest gap in ln(value), sorted descending.
/// The gap is searched among the larger half of the values; non-positive values
/// are never accepted.
std::vector<std::size_t> auto_threshold(const std::vector<double>& values);

struct CurveScore {
  BoundaryCurve curve;
  double score;
};

/// Finest-scale boundary curves with their scores S.
std::vector<CurveScore> score_curves(const ScaleStack2D& stack, const DetectorParams& params);

EdgeMap detect_1d(const Signal1D& signal, const ScaleSchedule& sched, const DecisionParams& dparams,
                  const DetectorParams& params);
EdgeMap detect_2d(const Image2D& image, const ScaleSchedule& sched, const DecisionParams& dparams,
                  const DetectorParams& params);

/// Single-scale mod-max with hysteresis: components (8-connected among mod-max pixels
/// at or above low * max|W|) are kept when they contain a pixel at or above high * max|W|.
EdgeMap canny_baseline(const Image2D& image, double s, double low = 0.1, double high = 0.3);

}  // namespace wavedge
