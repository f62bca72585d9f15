#pragma once

#include <cstddef>
#include <vector>

#include "wavedge/decision.hpp"
#include "wavedge/modmax.hpp"
#include "wavedge/signal.hpp"

namespace wavedge {

/// Mod-max connected across scales, coarse to fine.
///
/// When two coarse mod-max choose the same fine one, the connection with the
/// higher score keeps the line; the other line records the shared fine entry as
/// its last and points at the surviving line through `merged_into`.
template <class MaxT>
struct MaximaLine {
  int id = 0;
  std::vector<MaxT> entries;
  int merged_into = -1;

  const MaxT& finest() const { return entries.back(); }
};

using MaximaLine1D = MaximaLine<ModMax1D>;
using MaximaLine2D = MaximaLine<ModMax2D>;

/// For each coarse mod-max, the index of the chosen fine mod-max or -1 (line ends).
/// Candidates lie within window_factor * s1; ties go to the smaller distance, then the smaller index.
std::vector<int> connect(const std::vector<ModMax1D>& coarse, const std::vector<ModMax1D>& fine,
                         const DecisionParams& p);
std::vector<int> connect(const std::vector<ModMax2D>& coarse, const std::vector<ModMax2D>& fine,
                         const DecisionParams& p);

std::vector<MaximaLine1D> filter_schedule(const Signal1D& source, const ScaleSchedule& sched,
                                          const DecisionParams& p);
std::vector<MaximaLine2D> filter_schedule(const Image2D& source, const ScaleSchedule& sched,
                                          const DecisionParams& p, NmsMode mode = NmsMode::Bilinear);

/// Transforms and mod-max of an image at every schedule scale. Connections are
/// evaluated lazily so that a few finest-scale points can be traced upward
/// without connecting the whole stack. Level 0 is the coarsest scale.
/// Not thread-safe: lookups fill internal caches.
class ScaleStack2D {
 public:
  ScaleStack2D(const Image2D& image, const ScaleSchedule& sched, const DecisionParams& p,
               NmsMode mode = NmsMode::Bilinear);

  std::size_t levels() const { return maxima_.size(); }
  double scale(std::size_t level) const { return scales_[level]; }
  const std::vector<ModMax2D>& maxima(std::size_t level) const { return maxima_[level]; }
  const DecisionParams& params() const { return params_; }

  /// Index at `level + 1` chosen by mod-max `n` at `level`, or -1.
  int choice(std::size_t level, int n) const;
  /// Among the mod-max at `level - 1` that choose `m`, the one with the highest score.
  /// When none chose `m` (several coarse points along a curve settled on a neighbour),
  /// the coarse candidate with the highest positive score toward `m`; -1 if there is none.
  int parent(std::size_t level, int m) const;

 private:
  struct Buckets {
    double size = 1.0;
    int nx = 0;
    int ny = 0;
    std::vector<std::vector<int>> cells;
  };

  std::vector<int> within(std::size_t level, double x, double y, double radius) const;

  DecisionParams params_;
  std::vector<double> scales_;
  std::vector<std::vector<ModMax2D>> maxima_;
  std::vector<Buckets> buckets_;
  mutable std::vector<std::vector<int>> choice_;  // -2 = not yet evaluated
};

/// Dense-scale tracking reference: scales s_max, s_max - 1/2, ... down to s_min.
/// Each line moves to the nearest same-sign mod-max within max(2, ceil(s/4)) pixels
/// (equidistant candidates go to the larger |W|). When two lines claim the same
/// mod-max the nearer one keeps it and the other ends. Unclaimed mod-max start lines.
std::vector<MaximaLine1D> edge_focusing_oracle(const Signal1D& source, double s_max, double s_min);

struct PairStats {
  double coarse = 0.0;
  double fine = 0.0;
  std::size_t connections = 0;
  std::size_t false_connections = 0;
  double displacement_sum = 0.0;

  double false_percent() const;
  /// Mean |fine-end displacement| in pixels over false connections (0 when there are none).
  double mean_displacement() const;
};

/// False-connection audit, per connection. Displacement is measured at the finer
/// scale between the chosen mod-max and where the true line of the coarse mod-max lies.
struct ConnectionReport {
  std::vector<PairStats> pairs;  // coarse to fine

  PairStats overall() const;
  /// Pools counts with another report over the same scale pairs.
  void merge(const ConnectionReport& other);
};

ConnectionReport audit(const std::vector<MaximaLine1D>& sparse, const std::vector<MaximaLine1D>& truth);

}  // namespace wavedge
