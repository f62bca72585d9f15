#pragma once

#include "wavedge/modmax.hpp"

namespace wavedge {

/// Which factors of the decision function take part in a score.
/// The sign (1-D) or angle (2-D) factor is always applied.
enum class Criterion { Full, DistanceOnly, DecayOnly };

/// Parameters of P(n, m) = Delta * D * Sign (1-D) or Delta * D * Angle (2-D).
///
/// `alpha` trades the distance term against the decay term: Delta uses
/// s1^{-alpha}, D uses s1^{alpha}. For s1 < 1 (unit-separation pattern
/// coordinates) a negative alpha favours decay; for pixel scales s1 > 1 the
/// roles swap and a positive alpha favours decay.
struct DecisionParams {
  double alpha = 0.0;
  /// Expected slope of ln|W| against ln s along a line: 1/2 in 1-D, 1 in 2-D.
  double decay_center = 0.5;
  /// Candidate radius in units of the finer scale.
  double window_factor = 4.0;
  Criterion criterion = Criterion::Full;

  static DecisionParams one_d(double alpha) { return {alpha, 0.5, 4.0, Criterion::Full}; }
  static DecisionParams two_d(double alpha) { return {alpha, 1.0, 4.0, Criterion::Full}; }
};

/// Decay centre for Gaussian-smoothed edges sampled on a sigma-adjusted schedule.
double sigma_adjusted_decay_center(double s2, double s1);

/// Delta = exp(-dist * s1^{-alpha}).
double distance_factor(double dist, double s1, double alpha);

/// D = exp(-|ln(|w2|/|w1|) / ln(s2/s1) - center| * s1^{alpha}).
double decay_factor(double w2, double w1, double s2, double s1, double alpha, double center);

/// Angle = exp(-|wrapped(a2 - a1)|).
double angle_factor(double a2, double a1);

/// Delta * D * Sign for raw 1-D quantities, honouring `p.criterion`.
double decision_score(double dist, double w2, double w1, double s2, double s1,
                      const DecisionParams& p);

/// P(n, m) for n at the coarser scale s2 and m at the finer scale s1.
double decision_1d(const ModMax1D& n, const ModMax1D& m, const DecisionParams& p);
double decision_2d(const ModMax2D& n, const ModMax2D& m, const DecisionParams& p);

}  // namespace wavedge
