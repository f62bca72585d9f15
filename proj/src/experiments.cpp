#include "wavedge/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace wavedge {

ConnectionReport row_audit(const Image2D& image, const ScaleSchedule& sched, const DecisionParams& p) {
  ConnectionReport pooled;
  for (int r = 0; r < image.rows(); ++r) {
    const Signal1D row = extract_row(image, r);
    const auto sparse = filter_schedule(row, sched, p);
    const auto truth = edge_focusing_oracle(row, sched.coarsest(), sched.finest());
    ConnectionReport report = audit(sparse, truth);
    // Rows without any connection at some scale pair still report every pair.
    if (report.pairs.size() + 1 != sched.size()) {
      ConnectionReport full;
      for (std::size_t i = 0; i + 1 < sched.size(); ++i) {
        PairStats stats{sched.scales()[i], sched.scales()[i + 1], 0, 0, 0.0};
        for (const auto& ps : report.pairs) {
          if (ps.coarse == stats.coarse && ps.fine == stats.fine) stats = ps;
        }
        full.pairs.push_back(stats);
      }
      report = std::move(full);
    }
    pooled.merge(report);
  }
  return pooled;
}

FomResult compare_detectors(const Phantom& phantom, const ScaleSchedule& sched, const DecisionParams& p,
                            const DetectorParams& dp) {
  const EdgeMap proposed = detect_2d(phantom.image, sched, p, dp);
  const EdgeMap canny = canny_baseline(phantom.image, sched.finest());
  return {fom(proposed, phantom.truth), fom(canny, phantom.truth)};
}

double calibrate_threshold(const std::vector<Phantom>& calibration, const ScaleSchedule& sched,
                           const DecisionParams& p, const DetectorParams& dp, double ln_lo, double ln_hi,
                           double ln_step) {
  if (calibration.empty()) throw std::invalid_argument("calibrate_threshold: no phantoms");
  if (!(ln_step > 0.0) || !(ln_hi >= ln_lo)) throw std::invalid_argument("calibrate_threshold: bad grid");
  const auto steps = static_cast<std::size_t>(std::floor((ln_hi - ln_lo) / ln_step + 1e-9)) + 1;
  std::vector<double> total(steps, 0.0);
  for (const Phantom& ph : calibration) {
    const ScaleStack2D stack(ph.image, sched, p);
    const auto curves = score_curves(stack, dp);
    for (std::size_t i = 0; i < steps; ++i) {
      const double t = std::exp(ln_lo + ln_step * static_cast<double>(i));
      EdgeMap map(ph.image.rows(), ph.image.cols());
      for (const auto& c : curves) {
        if (c.score <= t) continue;
        for (const auto& pt : c.curve.points) map.set(pt.y, pt.x);
      }
      total[i] += fom(map, ph.truth);
    }
  }
  const auto best = std::max_element(total.begin(), total.end()) - total.begin();
  return std::exp(ln_lo + ln_step * static_cast<double>(best));
}

PhantomSpec experiment_phantom(const ExperimentConfig& config, int index) {
  return experiment_phantom_seeded(config, config.seed + static_cast<std::uint64_t>(index));
}

PhantomSpec experiment_phantom_seeded(const ExperimentConfig& config, std::uint64_t seed) {
  PhantomSpec spec;
  spec.regions = standard_regions(config.rows, config.cols);
  spec.psf_axial = config.psf_axial;
  spec.psf_lateral = config.psf_lateral;
  spec.noise_sigma = config.noise_sigma;
  spec.seed = seed;
  return spec;
}

std::string run_table_experiment(TableKind kind, const ExperimentConfig& config) {
  if (config.phantoms < 1) throw std::invalid_argument("experiment: phantoms must be >= 1");
  const ScaleSchedule sched = ScaleSchedule::dyadic(config.scales);
  std::ostringstream csv;
  csv << std::setprecision(6);

  if (kind == TableKind::FalseConnections) {
    csv << "alpha,coarse,fine,connections,false,false_percent,spatial_error_px\n";
    for (double alpha : config.alphas) {
      ConnectionReport pooled;
      for (int k = 0; k < config.phantoms; ++k) {
        const Phantom ph = generate_phantom(experiment_phantom(config, k));
        pooled.merge(row_audit(ph.image, sched, DecisionParams::one_d(alpha)));
      }
      auto row = [&](const std::string& coarse, const std::string& fine, const PairStats& s) {
        csv << alpha << ',' << coarse << ',' << fine << ',' << s.connections << ',' << s.false_connections << ','
            << s.false_percent() << ',' << s.mean_displacement() << '\n';
      };
      for (const auto& s : pooled.pairs) {
        std::ostringstream c, f;
        c << s.coarse;
        f << s.fine;
        row(c.str(), f.str(), s);
      }
      row("all", "all", pooled.overall());
    }
    return csv.str();
  }

  csv << "phantom,alpha,threshold,fom_proposed,fom_canny\n";
  DetectorParams dp;
  dp.threshold = config.threshold;
  dp.subsample_fraction = config.fraction;
  dp.seed = config.seed;
  std::vector<Phantom> calibration;
  if (!config.threshold) {
    for (std::uint64_t seed : config.calibration_seeds) {
      calibration.push_back(generate_phantom(experiment_phantom_seeded(config, seed)));
    }
  }
  std::vector<DetectorParams> per_alpha;
  for (double alpha : config.alphas) {
    DetectorParams d = dp;
    if (!calibration.empty()) d.threshold = calibrate_threshold(calibration, sched, DecisionParams::two_d(alpha), dp);
    per_alpha.push_back(d);
  }
  for (int k = 0; k < config.phantoms; ++k) {
    const Phantom ph = generate_phantom(experiment_phantom(config, k));
    for (std::size_t a = 0; a < config.alphas.size(); ++a) {
      const FomResult r = compare_detectors(ph, sched, DecisionParams::two_d(config.alphas[a]), per_alpha[a]);
      csv << k << ',' << config.alphas[a] << ',';
      if (per_alpha[a].threshold) {
        csv << *per_alpha[a].threshold;
      } else {
        csv << "auto";
      }
      csv << ',' << r.proposed << ',' << r.canny << '\n';
    }
  }
  return csv.str();
}

}  // namespace wavedge
