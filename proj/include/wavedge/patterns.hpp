#pragma once

#include <optional>
#include <vector>

#include "wavedge/decision.hpp"
#include "wavedge/signal.hpp"

namespace wavedge {

/// Model edge built from Heaviside jumps, in unit coordinates: a jump of +1 at 0,
/// +A at 1 (kinds 3-6) and -B at beta (kinds 2, 4-6), optionally smoothed by a
/// Gaussian of width sigma.
///
///   kind 1  step          rho_0
///   kind 2  impulse       rho_0 - B rho_beta            B, beta > 0
///   kind 3  staircase     rho_0 + A rho_1               A > 1
///   kind 4  triplet       rho_0 + A rho_1 - B rho_beta  A, beta > 1, 0 < B < B*
///   kind 5  triplet       same formula                  beta > 1, B > 0, 0 < A < A*
///   kind 6  hole          same formula                  0 < beta < 1, A, B > 0
struct PatternSpec {
  int kind = 1;
  double A = 0.0;
  double B = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  /// Pixels per model unit when rendered with `synthesize`.
  double unit = 1.0;

  /// Checks the closed-form parameter ranges (B* / A* bounds are not checked here).
  void validate() const;
};

struct Jump {
  double position;
  double amplitude;
};

/// Jumps of the pattern in unit coordinates.
std::vector<Jump> pattern_jumps(const PatternSpec& spec);

/// Index of the jump at 0, at 1 and at beta within `pattern_jumps`; -1 when absent.
int jump_index_zero(const PatternSpec& spec);
int jump_index_one(const PatternSpec& spec);
int jump_index_beta(const PatternSpec& spec);

/// Renders the pattern with jump 0 at pixel `origin`. Each sample is the exact
/// average of the (smoothed) pattern over its cell [t, t+1).
Signal1D synthesize(const PatternSpec& spec, int length, double origin);

/// Closed-form Wf(u, s) in unit coordinates:
/// sqrt(2s) pi^{-1/4} (s/s') sum_i c_i exp(-(u - x_i)^2 / (2 s'^2)), s' = sqrt(s^2 + sigma^2).
double analytic_wt(const PatternSpec& spec, double u, double s);

/// n-th derivative of analytic_wt in u, n in [0, 3].
double analytic_wt_derivative(const PatternSpec& spec, double u, double s, int n);

struct PatternMaximum {
  double position;
  double value;
};

/// Mod-max of analytic_wt at scale s: sign-scanned bisection on a grid of step s'/50,
/// refined to 1e-9. Sorted by position.
std::vector<PatternMaximum> find_modmax(const PatternSpec& spec, double s);

struct CriticalPoint {
  double position;
  double scale;  // s*
};

/// Solution of dW/du = d2W/du2 = 0: where the short maxima-line appears (kinds 3-6).
CriticalPoint critical_point(const PatternSpec& spec);
double critical_scale(const PatternSpec& spec);

struct CriticalAmplitude {
  double amplitude;  // B* for kind 4, A* for kinds 5 and 6
  double position;
  double scale;
};

/// Solution of dW/du = d2W/du2 = d3W/du3 = 0 in (u, s, amplitude) for kinds 4-6.
/// Empty when no such amplitude lies in [0.02, 50]: the pattern then holds for every amplitude.
std::optional<CriticalAmplitude> critical_amplitude_point(const PatternSpec& spec);
std::optional<double> critical_amplitude(const PatternSpec& spec);

/// Index of the jump that the maxima-line through (u, s) converges to as s -> 0.
int trace_to_jump(const PatternSpec& spec, double u, double s);

/// Options for the reliability values Q1 / Q0.
struct QOptions {
  DecisionParams decision;
  int scale_points = 50;
  /// The sweep covers [sweep_floor * s*, s*].
  double sweep_floor = 0.02;
  /// Points with amplitude within this relative distance of B*/A* are skipped.
  double guard_band = 0.05;
  /// Positions and scales are multiplied by this before scoring (1 = unit coordinates).
  double unit = 1.0;
};

struct QValue {
  PatternSpec spec;
  double q1 = 0.0;  // connection margin along the line converging to 1
  double q0 = 0.0;  // connection margin along the line converging to 0
  bool excluded = false;  // outside the pattern's range or inside the guard band
  double s_star = 0.0;
  std::optional<double> amp_star;

  double margin() const { return q1 < q0 ? q1 : q0; }
};

/// Q1, Q0 for one parameter set and several decision criteria at once.
std::vector<QValue> q_values(const PatternSpec& spec, const std::vector<QOptions>& options);
QValue q_value(const PatternSpec& spec, const QOptions& options);

struct QGrid {
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> beta;
};

/// Evaluates Q over the full tensor grid (A x B x beta) for one kind.
std::vector<QValue> q_surface(int kind, const QOptions& options, const QGrid& grid);

/// Zero level set of a sampled field f(x_i, y_j) as polylines (marching squares).
struct Polyline {
  std::vector<std::pair<double, double>> points;
};
std::vector<Polyline> zero_level_curves(const std::vector<double>& xs, const std::vector<double>& ys,
                                        const std::vector<double>& values);

}  // namespace wavedge
