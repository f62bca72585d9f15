#include "wavedge/patterns.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace wavedge {
namespace {

const double kPiQuarter = std::pow(std::numbers::pi, -0.25);

// Probabilists' Hermite polynomials: d^n/dw^n e^{-w^2/2} = (-1)^n He_n(w) e^{-w^2/2}.
double hermite(int n, double w) {
  switch (n) {
    case 0: return 1.0;
    case 1: return w;
    case 2: return w * w - 1.0;
    case 3: return w * (w * w - 3.0);
    case 4: return (w * w - 6.0) * w * w + 3.0;
    default: throw std::invalid_argument("hermite order out of range");
  }
}

double smoothed_width(const PatternSpec& spec, double s) { return std::sqrt(s * s + spec.sigma * spec.sigma); }

// Shape functions with the positive prefactors stripped. With w_i = (u - x_i)/tau,
// G_n(u, tau) = sum_i c_i He_n(w_i) e^{-w_i^2/2} and d^nW/du^n = pref(s) (-1/tau)^n G_n.
// Every evaluator takes an optional `lift` that multiplies the result by e^{lift}; with
// lift = lift_at(u, tau) the nearest bump is O(1) and nothing underflows far from the jumps.
struct Shape {
  const std::vector<Jump>& jumps;

  double lift_at(double u, double tau) const {
    double m = std::numeric_limits<double>::infinity();
    for (const Jump& j : jumps) {
      const double w = (u - j.position) / tau;
      m = std::min(m, 0.5 * w * w);
    }
    return m;
  }
  double g(int n, double u, double tau, double lift = 0.0) const {
    double acc = 0.0;
    for (const Jump& j : jumps) {
      const double w = (u - j.position) / tau;
      acc += j.amplitude * hermite(n, w) * std::exp(lift - 0.5 * w * w);
    }
    return acc;
  }
  // dG_n/du = -G_{n+1}/tau.
  double g_du(int n, double u, double tau, double lift = 0.0) const { return -g(n + 1, u, tau, lift) / tau; }
  // dG_n/d(ln tau) = sum c_i w_i He_{n+1}(w_i) e^{-w_i^2/2}.
  double g_dlog(int n, double u, double tau, double lift = 0.0) const {
    double acc = 0.0;
    for (const Jump& j : jumps) {
      const double w = (u - j.position) / tau;
      acc += j.amplitude * w * hermite(n + 1, w) * std::exp(lift - 0.5 * w * w);
    }
    return acc;
  }
  // Sum of |c_i| e^{-w_i^2/2}: the scale against which G_n is small at (u, tau).
  double envelope(double u, double tau, double lift = 0.0) const {
    double acc = 0.0;
    for (const Jump& j : jumps) {
      const double w = (u - j.position) / tau;
      acc += std::abs(j.amplitude) * std::exp(lift - 0.5 * w * w);
    }
    return acc;
  }
  // d envelope / du and d envelope / d(ln tau).
  Eigen::Vector2d envelope_gradient(double u, double tau, double lift = 0.0) const {
    Eigen::Vector2d d(0.0, 0.0);
    for (const Jump& j : jumps) {
      const double w = (u - j.position) / tau;
      const double e = std::abs(j.amplitude) * std::exp(lift - 0.5 * w * w);
      d[0] -= w / tau * e;
      d[1] += w * w * e;
    }
    return d;
  }
  double norm() const {
    double m = 0.0;
    for (const Jump& j : jumps) m += std::abs(j.amplitude);
    return m;
  }
};

double min_separation(const std::vector<Jump>& jumps) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    for (std::size_t k = i + 1; k < jumps.size(); ++k) {
      d = std::min(d, std::abs(jumps[i].position - jumps[k].position));
    }
  }
  return std::isfinite(d) ? d : 1.0;
}

// Scan windows [x_i - 8 tau, x_i + 8 tau], merged. Outside them every bump is below e^{-32}.
std::vector<std::pair<double, double>> scan_windows(const std::vector<Jump>& jumps, double tau) {
  std::vector<std::pair<double, double>> w;
  for (const Jump& j : jumps) w.emplace_back(j.position - 8.0 * tau, j.position + 8.0 * tau);
  std::sort(w.begin(), w.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& iv : w) {
    if (!merged.empty() && iv.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

// All sign changes of G_1: a grid of step tau/per_tau inside the windows, and at most
// gap_points samples across each gap between windows, where the lifted sign still resolves
// roots balanced between two far-apart bumps. Each root is refined by bisection.
std::vector<double> derivative_roots(const Shape& shape, double tau, int per_tau, bool refine) {
  constexpr int gap_points = 2000;
  auto sign_of = [&](double x) { return shape.g(1, x, tau, shape.lift_at(x, tau)); };
  const double h = tau / per_tau;
  const auto windows = scan_windows(shape.jumps, tau);
  std::vector<double> grid;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto [a, b] = windows[k];
    if (k > 0) {
      const double gap_start = windows[k - 1].second;
      const int steps = std::min(gap_points, static_cast<int>(std::ceil((a - gap_start) / h)));
      for (int i = 1; i < steps; ++i) grid.push_back(gap_start + (a - gap_start) * i / steps);
    }
    const int steps = static_cast<int>(std::ceil((b - a) / h));
    for (int i = 0; i <= steps; ++i) grid.push_back(i == steps ? b : a + i * h);
  }

  std::vector<double> roots;
  double x0 = grid.front();
  double g0 = sign_of(x0);
  if (g0 == 0.0) roots.push_back(x0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double x1 = grid[i];
    const double g1 = sign_of(x1);
    // A grid point can land exactly on a root (symmetric windows around a single jump).
    if (g1 == 0.0) roots.push_back(x1);
    if ((g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0)) {
      double lo = x0, hi = x1, glo = g0;
      if (refine) {
        int iter = 0;
        while (hi - lo > 1e-10 && iter < 200) {
          const double mid = 0.5 * (lo + hi);
          const double gm = sign_of(mid);
          if (gm == 0.0) {
            lo = hi = mid;
            break;
          }
          if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
          ++iter;
        }
        if (hi - lo > 1e-9) throw std::runtime_error("find_modmax: bisection did not converge");
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    g0 = g1;
  }
  return roots;
}

struct FoldPoint {
  double u;
  double tau;
};

// Damped least-squares Newton: SVD solve tolerates the singular Jacobian of symmetric folds.
template <int N, typename Residual, typename Jacobian>
bool newton_solve(Eigen::Matrix<double, N, 1>& x, Residual residual, Jacobian jacobian, double tol) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  Vec r = residual(x);
  for (int iter = 0; iter < 200; ++iter) {
    if (!r.allFinite()) return false;
    if (r.norm() < tol) return true;
    const Mat J = jacobian(x);
    if (!J.allFinite()) return false;
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    Vec step = svd.solve(-r);
    // Keep the log-scale step modest so the iterate cannot jump to another fold.
    const double limit = 0.25;
    if (step.cwiseAbs().maxCoeff() > limit) step *= limit / step.cwiseAbs().maxCoeff();
    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k) {
      const Vec trial = x + lambda * step;
      const Vec rt = residual(trial);
      if (rt.allFinite() && rt.norm() < r.norm()) {
        x = trial;
        r = rt;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) return r.norm() < 100.0 * tol;
  }
  return r.norm() < 100.0 * tol;
}

// Folds can sit far out in the tails of every bump, so the system is divided by the local envelope.
// Residual and Jacobian share one lift per point, which cancels in every ratio below.
std::optional<FoldPoint> refine_fold(const Shape& shape, double u, double tau) {
  Eigen::Vector2d x(u, std::log(tau));
  auto residual = [&](const Eigen::Vector2d& v) -> Eigen::Vector2d {
    const double t = std::exp(v[1]);
    const double l = shape.lift_at(v[0], t);
    return Eigen::Vector2d(shape.g(1, v[0], t, l), shape.g(2, v[0], t, l)) / shape.envelope(v[0], t, l);
  };
  auto jacobian = [&](const Eigen::Vector2d& v) -> Eigen::Matrix2d {
    const double t = std::exp(v[1]);
    const double l = shape.lift_at(v[0], t);
    const double e = shape.envelope(v[0], t, l);
    const Eigen::Vector2d r(shape.g(1, v[0], t, l), shape.g(2, v[0], t, l));
    Eigen::Matrix2d J;
    J << shape.g_du(1, v[0], t, l), shape.g_dlog(1, v[0], t, l), shape.g_du(2, v[0], t, l),
        shape.g_dlog(2, v[0], t, l);
    return Eigen::Matrix2d(J / e - r * shape.envelope_gradient(v[0], t, l).transpose() / (e * e));
  };
  if (!newton_solve<2>(x, residual, jacobian, 1e-12)) return std::nullopt;
  return FoldPoint{x[0], std::exp(x[1])};
}

// First scale (increasing) at which two extrema of W merge.
std::optional<FoldPoint> first_fold(const std::vector<Jump>& jumps) {
  const Shape shape{jumps};
  double lo = jumps.front().position, hi = lo;
  for (const Jump& j : jumps) {
    lo = std::min(lo, j.position);
    hi = std::max(hi, j.position);
  }
  const double span = std::max(hi - lo, 1e-6);
  const double t0 = 0.02 * min_separation(jumps);
  const double t1 = 4.0 * span;
  const int samples = 120;
  const double ratio = std::pow(t1 / t0, 1.0 / (samples - 1));

  std::vector<double> prev = derivative_roots(shape, t0, 25, false);
  double prev_tau = t0;
  for (int k = 1; k < samples; ++k) {
    const double tau = t0 * std::pow(ratio, k);
    std::vector<double> cur = derivative_roots(shape, tau, 25, false);
    if (cur.size() < prev.size() && prev.size() >= 2) {
      // Seed from the closest pair just before the merge; fall back to the other pairs.
      std::vector<std::size_t> pairs(prev.size() - 1);
      for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = i;
      std::sort(pairs.begin(), pairs.end(), [&](std::size_t a, std::size_t b) {
        return prev[a + 1] - prev[a] < prev[b + 1] - prev[b];
      });
      for (std::size_t i : pairs) {
        for (double seed_tau : {std::sqrt(prev_tau * tau), prev_tau, tau}) {
          const auto fold = refine_fold(shape, 0.5 * (prev[i] + prev[i + 1]), seed_tau);
          if (fold && fold->tau > 0.5 * prev_tau && fold->tau < 2.0 * tau &&
              fold->u > lo - 8.0 * fold->tau && fold->u < hi + 8.0 * fold->tau) {
            return fold;
          }
        }
      }
    }
    prev = std::move(cur);
    prev_tau = tau;
  }
  return std::nullopt;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("PatternSpec: " + what);
}

// Index of the jump whose amplitude is the transformation parameter.
int amplitude_jump(const PatternSpec& spec) { return spec.kind == 4 ? 2 : 1; }

double amplitude_of(const PatternSpec& spec) { return spec.kind == 4 ? spec.B : spec.A; }

PatternSpec with_amplitude(PatternSpec spec, double amp) {
  (spec.kind == 4 ? spec.B : spec.A) = amp;
  return spec;
}

// Kind 6 only. At large tau the sign of W at u = tau^2 ln y tends to that of h(y) = 1 + A y - B y^beta.
// When h dips below zero, W keeps two sign changes and three maxima-lines at every scale: no fold exists.
bool lines_persist(const PatternSpec& spec) {
  if (spec.kind != 6) return false;
  const double y = std::pow(spec.A / (spec.B * spec.beta), 1.0 / (spec.beta - 1.0));
  return spec.A * y * (1.0 - spec.beta) / spec.beta >= 1.0;
}

// Cell average of the unit step at x, smoothed by sigma, over [t, t+1).
double cell_step(double t, double x, double sigma) {
  if (sigma <= 0.0) return std::clamp(t + 1.0 - x, 0.0, 1.0);
  auto integral = [](double z) {
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return z * cdf + pdf;
  };
  return sigma * (integral((t + 1.0 - x) / sigma) - integral((t - x) / sigma));
}

}  // namespace

void PatternSpec::validate() const {
  require(kind >= 1 && kind <= 6, "kind must be in 1..6, got " + std::to_string(kind));
  require(std::isfinite(A) && std::isfinite(B) && std::isfinite(beta) && std::isfinite(sigma) &&
              std::isfinite(unit),
          "parameters must be finite");
  require(sigma >= 0.0, "sigma must be >= 0");
  require(unit > 0.0, "unit must be > 0");
  switch (kind) {
    case 2: require(B > 0.0 && beta > 0.0, "kind 2 needs B, beta > 0"); break;
    case 3: require(A > 1.0, "kind 3 needs A > 1"); break;
    case 4: require(A > 1.0 && beta > 1.0 && B > 0.0, "kind 4 needs A, beta > 1 and B > 0"); break;
    case 5: require(beta > 1.0 && B > 0.0 && A > 0.0, "kind 5 needs beta > 1 and A, B > 0"); break;
    case 6: require(beta > 0.0 && beta < 1.0 && A > 0.0 && B > 0.0, "kind 6 needs 0 < beta < 1 and A, B > 0"); break;
    default: break;
  }
}

std::vector<Jump> pattern_jumps(const PatternSpec& spec) {
  switch (spec.kind) {
    case 1: return {{0.0, 1.0}};
    case 2: return {{0.0, 1.0}, {spec.beta, -spec.B}};
    case 3: return {{0.0, 1.0}, {1.0, spec.A}};
    case 4:
    case 5:
    case 6: return {{0.0, 1.0}, {1.0, spec.A}, {spec.beta, -spec.B}};
    default: throw std::invalid_argument("PatternSpec: kind must be in 1..6");
  }
}

int jump_index_zero(const PatternSpec&) { return 0; }
int jump_index_one(const PatternSpec& spec) { return spec.kind >= 3 ? 1 : -1; }
int jump_index_beta(const PatternSpec& spec) {
  if (spec.kind == 2) return 1;
  return spec.kind >= 4 ? 2 : -1;
}

Signal1D synthesize(const PatternSpec& spec, int length, double origin) {
  spec.validate();
  const double extent = spec.unit * std::max(1.0, spec.beta);
  if (!(origin >= 0.0) || !(origin + extent < length)) {
    throw std::out_of_range("synthesize: edges at [" + std::to_string(origin) + ", " +
                            std::to_string(origin + extent) + "] fall outside [0, " + std::to_string(length) +
                            ")");
  }
  const auto jumps = pattern_jumps(spec);
  const double sigma_px = spec.sigma * spec.unit;
  std::vector<double> samples(static_cast<std::size_t>(length), 0.0);
  for (int t = 0; t < length; ++t) {
    double v = 0.0;
    for (const Jump& j : jumps) v += j.amplitude * cell_step(t, origin + j.position * spec.unit, sigma_px);
    samples[t] = v;
  }
  return Signal1D(std::move(samples));
}

double analytic_wt(const PatternSpec& spec, double u, double s) { return analytic_wt_derivative(spec, u, s, 0); }

double analytic_wt_derivative(const PatternSpec& spec, double u, double s, int n) {
  if (n < 0 || n > 3) throw std::invalid_argument("analytic_wt_derivative: order must be in 0..3");
  if (!(s > 0.0)) throw std::invalid_argument("analytic_wt: scale must be > 0");
  const auto jumps = pattern_jumps(spec);
  const double tau = smoothed_width(spec, s);
  const double pref = std::sqrt(2.0 * s) * kPiQuarter * (s / tau) * std::pow(-1.0 / tau, n);
  return pref * Shape{jumps}.g(n, u, tau);
}

std::vector<PatternMaximum> find_modmax(const PatternSpec& spec, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("find_modmax: scale must be > 0");
  const auto jumps = pattern_jumps(spec);
  const Shape shape{jumps};
  const double tau = smoothed_width(spec, s);
  std::vector<PatternMaximum> out;
  for (double u : derivative_roots(shape, tau, 50, true)) {
    // |W| is maximal where W and W'' have opposite signs.
    const double l = shape.lift_at(u, tau);
    if (shape.g(0, u, tau, l) * shape.g(2, u, tau, l) < 0.0) out.push_back({u, analytic_wt(spec, u, s)});
  }
  return out;
}

CriticalPoint critical_point(const PatternSpec& spec) {
  if (spec.kind < 3 || spec.kind > 6) throw std::invalid_argument("critical_scale: kind must be in 3..6");
  if (lines_persist(spec)) {
    throw std::domain_error("critical_scale: the three maxima-lines never merge (1 + A y - B y^beta < 0 for some y)");
  }
  const auto fold = first_fold(pattern_jumps(spec));
  if (!fold) throw std::runtime_error("critical_scale: Newton did not converge from any seed");
  if (!(fold->tau > spec.sigma)) {
    throw std::runtime_error("critical_scale: lines merge inside the smoothing width (no s* > 0)");
  }
  return {fold->u, std::sqrt(fold->tau * fold->tau - spec.sigma * spec.sigma)};
}

double critical_scale(const PatternSpec& spec) { return critical_point(spec).scale; }

std::optional<CriticalAmplitude> critical_amplitude_point(const PatternSpec& spec) {
  if (spec.kind < 4 || spec.kind > 6) throw std::invalid_argument("critical_amplitude: kind must be in 4..6");
  // Along the fold curve the third derivative changes sign where the fold turns into a cusp.
  struct Sample {
    double amp;
    FoldPoint fold;
    double g3;
  };
  std::vector<Sample> scan;
  const double a0 = 0.02, a1 = 50.0;
  const int samples = 48;
  for (int k = 0; k < samples; ++k) {
    const double amp = a0 * std::pow(a1 / a0, double(k) / (samples - 1));
    const auto jumps = pattern_jumps(with_amplitude(spec, amp));
    const auto fold = first_fold(jumps);
    if (!fold) continue;
    const Shape shape{jumps};
    scan.push_back({amp, *fold, shape.g(3, fold->u, fold->tau, shape.lift_at(fold->u, fold->tau))});
  }

  const int idx = amplitude_jump(spec);
  const double sign = spec.kind == 4 ? -1.0 : 1.0;
  bool bracketed = false;
  for (std::size_t k = 1; k < scan.size(); ++k) {
    if ((scan[k - 1].g3 < 0.0) == (scan[k].g3 < 0.0)) continue;
    bracketed = true;
    // Refine the bracket on the fold curve, then polish the full 3x3 system.
    double lo = scan[k - 1].amp, hi = scan[k].amp, glo = scan[k - 1].g3;
    FoldPoint seed = scan[k - 1].fold;
    for (int it = 0; it < 40 && hi / lo > 1.0 + 1e-6; ++it) {
      const double mid = std::sqrt(lo * hi);
      const auto jumps = pattern_jumps(with_amplitude(spec, mid));
      const Shape shape{jumps};
      auto fold = refine_fold(shape, seed.u, seed.tau);
      if (!fold) fold = first_fold(jumps);
      if (!fold) break;
      const double g3 = shape.g(3, fold->u, fold->tau, shape.lift_at(fold->u, fold->tau));
      seed = *fold;
      if ((g3 < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = g3;
      } else {
        hi = mid;
      }
    }

    Eigen::Vector3d x(seed.u, std::log(seed.tau), std::sqrt(lo * hi));
    auto jumps_at = [&](double amp) { return pattern_jumps(with_amplitude(spec, amp)); };
    auto residual = [&](const Eigen::Vector3d& v) -> Eigen::Vector3d {
      const auto jumps = jumps_at(v[2]);
      const Shape shape{jumps};
      const double t = std::exp(v[1]);
      const double l = shape.lift_at(v[0], t);
      return Eigen::Vector3d(shape.g(1, v[0], t, l), shape.g(2, v[0], t, l), shape.g(3, v[0], t, l)) /
             shape.envelope(v[0], t, l);
    };
    auto jacobian = [&](const Eigen::Vector3d& v) -> Eigen::Matrix3d {
      const auto jumps = jumps_at(v[2]);
      const Shape shape{jumps};
      const double t = std::exp(v[1]);
      const double l = shape.lift_at(v[0], t);
      const double w = (v[0] - jumps[idx].position) / t;
      const double bump = std::exp(l - 0.5 * w * w);
      const double env = shape.envelope(v[0], t, l);
      const Eigen::Vector3d r(shape.g(1, v[0], t, l), shape.g(2, v[0], t, l), shape.g(3, v[0], t, l));
      const Eigen::Vector2d grad = shape.envelope_gradient(v[0], t, l);
      const Eigen::Vector3d denv(grad[0], grad[1], bump);
      Eigen::Matrix3d J;
      for (int n = 1; n <= 3; ++n) {
        J(n - 1, 0) = shape.g_du(n, v[0], t, l);
        J(n - 1, 1) = shape.g_dlog(n, v[0], t, l);
        J(n - 1, 2) = hermite(n, w) * sign * bump;
      }
      return Eigen::Matrix3d(J / env - r * denv.transpose() / (env * env));
    };
    if (!newton_solve<3>(x, residual, jacobian, 1e-11)) continue;
    const double tau = std::exp(x[1]);
    if (!(x[2] > 0.0) || !(tau > spec.sigma)) continue;
    return CriticalAmplitude{x[2], x[0], std::sqrt(tau * tau - spec.sigma * spec.sigma)};
  }
  if (bracketed) throw std::runtime_error("critical_amplitude: Newton did not converge from any seed");
  return std::nullopt;
}

std::optional<double> critical_amplitude(const PatternSpec& spec) {
  const auto c = critical_amplitude_point(spec);
  if (!c) return std::nullopt;
  return c->amplitude;
}

int trace_to_jump(const PatternSpec& spec, double u, double s) {
  const auto jumps = pattern_jumps(spec);
  const Shape shape{jumps};
  const double target = min_separation(jumps) / 8.0;
  auto nearest = [&](double x) {
    int best = 0;
    for (std::size_t i = 1; i < jumps.size(); ++i) {
      if (std::abs(jumps[i].position - x) < std::abs(jumps[best].position - x)) best = static_cast<int>(i);
    }
    return best;
  };

  double tau = smoothed_width(spec, s);
  const bool is_max = shape.g(2, u, tau, shape.lift_at(u, tau)) < 0.0;
  double factor = 0.8;
  while (tau > target) {
    const double next = std::max(tau * factor, target);
    double x = u;
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      const double l = shape.lift_at(x, next);
      const double g1 = shape.g(1, x, next, l);
      const double g2 = shape.g(2, x, next, l);
      if (g2 == 0.0) break;
      // G_1' = -G_2/tau, so the Newton update is x + tau G_1/G_2.
      double dx = next * g1 / g2;
      dx = std::clamp(dx, -0.1 * next, 0.1 * next);
      x += dx;
      if (std::abs(dx) < 1e-13 * (1.0 + std::abs(x))) {
        ok = true;
        break;
      }
    }
    ok = ok && (shape.g(2, x, next, shape.lift_at(x, next)) < 0.0) == is_max && std::abs(x - u) < 0.5 * tau;
    if (ok) {
      u = x;
      tau = next;
      factor = std::max(0.8, factor * factor);
    } else {
      factor = std::sqrt(factor);
      if (factor > 1.0 - 1e-12) throw std::runtime_error("trace_to_jump: continuation stalled");
    }
  }
  return nearest(u);
}

namespace {

struct LabeledMax {
  int label;
  double position;
  double value;
};

struct SweepLevel {
  double scale;
  std::vector<LabeledMax> maxima;
};

std::vector<LabeledMax> labeled_modmax(const PatternSpec& spec, double s) {
  std::vector<LabeledMax> out;
  for (const auto& m : find_modmax(spec, s)) out.push_back({trace_to_jump(spec, m.position, s), m.position, m.value});
  return out;
}

// Mod-max at s*: the short line sits exactly on the fold, where the sign scan cannot see it.
std::vector<LabeledMax> labeled_at_fold(const PatternSpec& spec, const CriticalPoint& cp, int short_label) {
  const double tau = smoothed_width(spec, cp.scale);
  std::vector<LabeledMax> out;
  for (const auto& m : find_modmax(spec, cp.scale)) {
    if (std::abs(m.position - cp.position) < 0.05 * tau) continue;
    out.push_back({trace_to_jump(spec, m.position, cp.scale), m.position, m.value});
  }
  out.push_back({short_label, cp.position, analytic_wt(spec, cp.position, cp.scale)});
  return out;
}

// Smallest margin P(same) - max P(other) over the sweep; +inf when no comparison arises.
double sweep_margin(const std::vector<SweepLevel>& coarse, const std::vector<SweepLevel>& fine, int label,
                    const QOptions& opt) {
  double q = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    const double s2 = coarse[k].scale * opt.unit;
    const double s1 = fine[k].scale * opt.unit;
    for (const auto& n : coarse[k].maxima) {
      if (n.label != label) continue;
      double same = -1.0, other = -1.0;
      for (const auto& m : fine[k].maxima) {
        const double p =
            decision_score(std::abs(n.position - m.position) * opt.unit, n.value, m.value, s2, s1, opt.decision);
        if (m.label == label) {
          same = std::max(same, p);
        } else {
          other = std::max(other, p);
        }
      }
      if (same < 0.0 || other < 0.0) continue;
      q = std::min(q, same - other);
    }
  }
  return q;
}

// Kinds 4 and 5 exist only below the critical amplitude; near it the short line's label is ill-defined.
bool amplitude_excluded(const PatternSpec& spec, const std::optional<double>& amp_star, double guard_band) {
  if (!amp_star) return false;
  const double amp = amplitude_of(spec);
  if ((spec.kind == 4 || spec.kind == 5) && amp >= *amp_star) return true;
  if (spec.kind == 6 && amp <= *amp_star) return true;
  return std::abs(amp - *amp_star) < guard_band * *amp_star;
}

}  // namespace

std::vector<QValue> q_values(const PatternSpec& spec, const std::vector<QOptions>& options) {
  spec.validate();
  if (spec.kind < 3) throw std::invalid_argument("q_surface: kind must be in 3..6");
  std::vector<QValue> out(options.size());
  for (auto& v : out) v.spec = spec;
  if (options.empty()) return out;

  const QOptions& first = options.front();
  if (lines_persist(spec)) {
    for (auto& v : out) {
      v.excluded = true;
      v.q1 = v.q0 = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
  }
  if (spec.kind >= 4) {
    const auto amp_star = critical_amplitude(spec);
    const bool excluded = amplitude_excluded(spec, amp_star, first.guard_band);
    for (auto& v : out) {
      v.amp_star = amp_star;
      v.excluded = excluded;
    }
    if (excluded) {
      for (auto& v : out) v.q1 = v.q0 = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
  }

  const CriticalPoint cp = critical_point(spec);
  const double s_star = cp.scale;

  // The line that is born at s* is the one converging to the jump nearest the fold.
  int short_label = 0;
  {
    const double below = s_star * (1.0 - 1e-3);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : find_modmax(spec, below)) {
      if (std::abs(m.position - cp.position) < best) {
        best = std::abs(m.position - cp.position);
        short_label = trace_to_jump(spec, m.position, below);
      }
    }
  }
  const int long_label = short_label == 0 ? 1 : 0;

  const int n = first.scale_points;
  std::vector<double> ts(n);
  for (int k = 0; k < n; ++k) {
    ts[k] = n == 1 ? 1.0 : first.sweep_floor * std::pow(1.0 / first.sweep_floor, double(k) / (n - 1));
  }
  ts.back() = 1.0;

  auto level = [&](double s) {
    if (s == s_star) return SweepLevel{s, labeled_at_fold(spec, cp, short_label)};
    return SweepLevel{s, labeled_modmax(spec, s)};
  };

  // Long line: s1 in (0, s*], s2 = 2 s1. Short line: s2 in (0, s*], s1 = s2 / 2.
  std::vector<SweepLevel> long_coarse, long_fine, short_coarse, short_fine;
  for (double t : ts) {
    const double s = t * s_star;
    const double mid = t == 1.0 ? s_star : s;
    long_fine.push_back(level(mid));
    long_coarse.push_back(level(2.0 * s));
    short_coarse.push_back(long_fine.back());
    short_fine.push_back(level(0.5 * s));
  }

  for (std::size_t i = 0; i < options.size(); ++i) {
    const double q_long = sweep_margin(long_coarse, long_fine, long_label, options[i]);
    const double q_short = sweep_margin(short_coarse, short_fine, short_label, options[i]);
    out[i].s_star = s_star;
    out[i].q1 = long_label == 1 ? q_long : q_short;
    out[i].q0 = long_label == 0 ? q_long : q_short;
  }
  return out;
}

QValue q_value(const PatternSpec& spec, const QOptions& options) { return q_values(spec, {options}).front(); }

std::vector<QValue> q_surface(int kind, const QOptions& options, const QGrid& grid) {
  std::vector<double> as = grid.A.empty() ? std::vector<double>{0.0} : grid.A;
  std::vector<double> bs = grid.B.empty() ? std::vector<double>{0.0} : grid.B;
  std::vector<double> betas = grid.beta.empty() ? std::vector<double>{0.0} : grid.beta;
  std::vector<QValue> out;
  out.reserve(as.size() * bs.size() * betas.size());
  // B* (kind 4) or A* (kinds 5, 6) depends only on the two fixed parameters.
  std::map<std::pair<double, double>, std::optional<double>> amp_cache;
  for (double beta : betas) {
    for (double b : bs) {
      for (double a : as) {
        PatternSpec spec{kind, a, b, beta, 0.0, 1.0};
        try {
          spec.validate();
        } catch (const std::invalid_argument&) {
          QValue v;
          v.spec = spec;
          v.excluded = true;
          v.q1 = v.q0 = std::numeric_limits<double>::quiet_NaN();
          out.push_back(v);
          continue;
        }
        if (kind >= 4) {
          const std::pair<double, double> key = kind == 4 ? std::pair{a, beta} : std::pair{b, beta};
          auto it = amp_cache.find(key);
          if (it == amp_cache.end()) it = amp_cache.emplace(key, critical_amplitude(spec)).first;
          if (amplitude_excluded(spec, it->second, options.guard_band)) {
            QValue v;
            v.spec = spec;
            v.excluded = true;
            v.amp_star = it->second;
            v.q1 = v.q0 = std::numeric_limits<double>::quiet_NaN();
            out.push_back(v);
            continue;
          }
        }
        out.push_back(q_value(spec, options));
      }
    }
  }
  return out;
}

std::vector<Polyline> zero_level_curves(const std::vector<double>& xs, const std::vector<double>& ys,
                                        const std::vector<double>& values) {
  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());
  if (values.size() != xs.size() * ys.size()) {
    throw std::invalid_argument("zero_level_curves: values must have xs.size() * ys.size() entries");
  }
  auto f = [&](int i, int j) { return values[static_cast<std::size_t>(j) * nx + i]; };
  auto finite = [&](int i, int j) { return std::isfinite(f(i, j)); };

  // Crossing points keyed by grid edge: 2*(j*nx+i) for (i,j)-(i+1,j), +1 for (i,j)-(i,j+1).
  auto edge_point = [&](long id) {
    const int cell = static_cast<int>(id / 2);
    const int i = cell % nx, j = cell / nx;
    const int i2 = id % 2 == 0 ? i + 1 : i;
    const int j2 = id % 2 == 0 ? j : j + 1;
    const double a = f(i, j), b = f(i2, j2);
    const double t = a / (a - b);
    return std::pair{xs[i] + t * (xs[i2] - xs[i]), ys[j] + t * (ys[j2] - ys[j])};
  };

  std::vector<std::pair<long, long>> segments;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      if (!finite(i, j) || !finite(i + 1, j) || !finite(i, j + 1) || !finite(i + 1, j + 1)) continue;
      const long bottom = 2L * (j * nx + i);
      const long top = 2L * ((j + 1) * nx + i);
      const long left = 2L * (j * nx + i) + 1;
      const long right = 2L * (j * nx + i + 1) + 1;
      const bool p00 = f(i, j) > 0, p10 = f(i + 1, j) > 0, p01 = f(i, j + 1) > 0, p11 = f(i + 1, j + 1) > 0;
      std::vector<long> cut;
      if (p00 != p10) cut.push_back(bottom);
      if (p10 != p11) cut.push_back(right);
      if (p01 != p11) cut.push_back(top);
      if (p00 != p01) cut.push_back(left);
      if (cut.size() == 2) {
        segments.emplace_back(cut[0], cut[1]);
      } else if (cut.size() == 4) {
        const double centre = 0.25 * (f(i, j) + f(i + 1, j) + f(i, j + 1) + f(i + 1, j + 1));
        if ((centre > 0) == p00) {
          segments.emplace_back(bottom, right);
          segments.emplace_back(top, left);
        } else {
          segments.emplace_back(bottom, left);
          segments.emplace_back(top, right);
        }
      }
    }
  }

  std::unordered_multimap<long, std::size_t> by_edge;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    by_edge.emplace(segments[k].first, k);
    by_edge.emplace(segments[k].second, k);
  }
  std::vector<char> used(segments.size(), 0);
  auto take_next = [&](long edge) -> long {
    auto [b, e] = by_edge.equal_range(edge);
    for (auto it = b; it != e; ++it) {
      if (used[it->second]) continue;
      used[it->second] = 1;
      const auto& seg = segments[it->second];
      return seg.first == edge ? seg.second : seg.first;
    }
    return -1;
  };

  std::vector<Polyline> curves;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (used[k]) continue;
    used[k] = 1;
    std::vector<long> chain{segments[k].first, segments[k].second};
    for (long e = take_next(chain.back()); e >= 0; e = take_next(chain.back())) chain.push_back(e);
    std::reverse(chain.begin(), chain.end());
    for (long e = take_next(chain.back()); e >= 0; e = take_next(chain.back())) chain.push_back(e);
    Polyline line;
    for (long e : chain) line.points.push_back(edge_point(e));
    curves.push_back(std::move(line));
  }
  return curves;
}

}  // namespace wavedge
