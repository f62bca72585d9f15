#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavedge/fom.hpp"
#include "wavedge/phantom.hpp"

namespace wavedge {

struct ExperimentConfig {
  std::vector<double> scales{32.0, 16.0, 8.0, 4.0};
  std::vector<double> alphas{-0.5, 0.0, 0.5};
  std::optional<double> threshold;
  double fraction = 0.1;
  std::uint64_t seed = 1;
  double psf_axial = 2.0;
  double psf_lateral = 4.0;
  double noise_sigma = 0.1;
  int rows = 256;
  int cols = 256;
  int phantoms = 2;
  /// FOM runs without a threshold calibrate T on phantoms with these seeds;
  /// when empty the automatic split is used instead.
  std::vector<std::uint64_t> calibration_seeds;
};

/// Audits every row of `image` against the dense-scale reference and pools the counts.
ConnectionReport row_audit(const Image2D& image, const ScaleSchedule& sched, const DecisionParams& p);

struct FomResult {
  double proposed;
  double canny;
};

/// Both detectors at the schedule's finest scale against the phantom truth.
FomResult compare_detectors(const Phantom& phantom, const ScaleSchedule& sched, const DecisionParams& p,
                            const DetectorParams& dp);

/// Threshold on the curve score that maximizes the mean proposed FOM over
/// `calibration`, searched over ln T in [ln_lo, ln_hi] with step `ln_step`.
/// Ties go to the smaller T.
double calibrate_threshold(const std::vector<Phantom>& calibration, const ScaleSchedule& sched,
                           const DecisionParams& p, const DetectorParams& dp, double ln_lo = 2.0,
                           double ln_hi = 10.0, double ln_step = 0.25);

enum class TableKind { FalseConnections, Fom };

/// CSV report. False connections: one row per (alpha, scale pair) plus an "all" row per alpha.
/// FOM: one row per (phantom, alpha) with the threshold used.
std::string run_table_experiment(TableKind kind, const ExperimentConfig& config);

/// Phantom `index` of an experiment: standard regions, seed + index.
PhantomSpec experiment_phantom(const ExperimentConfig& config, int index);
/// Same phantom family with an explicit seed.
PhantomSpec experiment_phantom_seeded(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace wavedge
