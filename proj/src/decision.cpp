#include "wavedge/decision.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wavedge {
namespace {

void check_scales(double s2, double s1) {
  if (!(s1 > 0.0) || !(s2 > s1)) throw std::invalid_argument("decision: need s2 > s1 > 0");
}

double combine(double delta, double decay, double orient, Criterion c) {
  switch (c) {
    case Criterion::DistanceOnly: return delta * orient;
    case Criterion::DecayOnly: return decay * orient;
    case Criterion::Full: break;
  }
  return delta * decay * orient;
}

}  // namespace

double sigma_adjusted_decay_center(double s2, double s1) {
  check_scales(s2, s1);
  return 0.5 + std::log(s2 / (2.0 * s1)) / std::numbers::ln2;
}

double distance_factor(double dist, double s1, double alpha) { return std::exp(-dist * std::pow(s1, -alpha)); }

double decay_factor(double w2, double w1, double s2, double s1, double alpha, double center) {
  check_scales(s2, s1);
  const double slope = std::log(std::abs(w2) / std::abs(w1)) / std::log(s2 / s1);
  return std::exp(-std::abs(slope - center) * std::pow(s1, alpha));
}

double angle_factor(double a2, double a1) { return std::exp(-std::abs(angle_difference(a2, a1))); }

double decision_score(double dist, double w2, double w1, double s2, double s1, const DecisionParams& p) {
  check_scales(s2, s1);
  if (!(w2 * w1 > 0.0)) return 0.0;
  const double delta = p.criterion == Criterion::DecayOnly ? 1.0 : distance_factor(dist, s1, p.alpha);
  const double decay =
      p.criterion == Criterion::DistanceOnly ? 1.0 : decay_factor(w2, w1, s2, s1, p.alpha, p.decay_center);
  return combine(delta, decay, 1.0, p.criterion);
}

double decision_1d(const ModMax1D& n, const ModMax1D& m, const DecisionParams& p) {
  return decision_score(std::abs(n.pos - m.pos), n.value, m.value, n.scale, m.scale, p);
}

double decision_2d(const ModMax2D& n, const ModMax2D& m, const DecisionParams& p) {
  check_scales(n.scale, m.scale);
  const double dist = std::hypot(double(n.x - m.x), double(n.y - m.y));
  const double delta = distance_factor(dist, m.scale, p.alpha);
  const double decay = decay_factor(n.value, m.value, n.scale, m.scale, p.alpha, p.decay_center);
  return combine(delta, decay, angle_factor(n.angle, m.angle), p.criterion);
}

}  // namespace wavedge
