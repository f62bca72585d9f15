#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wavedge/experiments.hpp"
#include "wavedge/patterns.hpp"

using namespace wavedge;
using nlohmann::json;

namespace {

// "lo:hi:n" (n evenly spaced values) or a single number.
std::vector<double> parse_range(const std::string& text) {
  if (text.empty()) return {};
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || parts[2] < 2) throw std::invalid_argument("range must be 'lo:hi:n' with n >= 2");
  const int n = static_cast<int>(parts[2]);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(parts[0] + (parts[1] - parts[0]) * i / (n - 1));
  return out;
}

Criterion parse_criterion(const std::string& name) {
  if (name == "full") return Criterion::Full;
  if (name == "distance") return Criterion::DistanceOnly;
  if (name == "decay") return Criterion::DecayOnly;
  throw std::invalid_argument("criterion must be full, distance or decay");
}

std::optional<double> parse_threshold(const std::string& text) {
  if (text == "auto") return std::nullopt;
  return std::stod(text);
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

// Shared keys of phantom specs and experiment configs.
void read_psf(const json& j, double& axial, double& lateral) {
  if (!j.contains("psf")) return;
  const auto& psf = j.at("psf");
  if (psf.is_array()) {
    axial = psf.at(0).get<double>();
    lateral = psf.at(1).get<double>();
  } else {
    axial = psf.at("axial").get<double>();
    lateral = psf.at("lateral").get<double>();
  }
}

ExperimentConfig read_config(const json& j) {
  ExperimentConfig c;
  if (j.contains("scales")) c.scales = j.at("scales").get<std::vector<double>>();
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    c.alphas = a.is_array() ? a.get<std::vector<double>>() : std::vector<double>{a.get<double>()};
  }
  if (j.contains("threshold")) {
    const auto& t = j.at("threshold");
    if (t.is_string()) {
      c.threshold = parse_threshold(t.get<std::string>());
    } else if (!t.is_null()) {
      c.threshold = t.get<double>();
    }
  }
  c.fraction = j.value("fraction", c.fraction);
  c.seed = j.value("seed", c.seed);
  read_psf(j, c.psf_axial, c.psf_lateral);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.rows = j.value("rows", c.rows);
  c.cols = j.value("cols", c.cols);
  c.phantoms = j.value("phantoms", c.phantoms);
  if (j.contains("calibration_seeds")) c.calibration_seeds = j.at("calibration_seeds").get<std::vector<std::uint64_t>>();
  return c;
}

Image2D scaled_to_unit(const Image2D& img) {
  double peak = 0.0;
  for (double v : img.pixels()) peak = std::max(peak, std::abs(v));
  Image2D out = img;
  if (peak > 0.0) {
    for (double& v : out.pixels()) v /= peak;
  }
  return out;
}

int run_pattern_lab(int kind, const std::vector<double>& alphas, const std::string& criterion,
                    const std::string& a_range, const std::string& b_range, const std::string& beta_range,
                    int scale_points, double unit, const std::string& out_path, const std::string& curves_path) {
  QGrid grid{parse_range(a_range), parse_range(b_range), parse_range(beta_range)};
  std::ofstream file;
  std::ostream& out = open_out(out_path, file);
  out << std::setprecision(8) << "kind,alpha,A,B,beta,Q1,Q0\n";

  std::ofstream curves_file;
  if (!curves_path.empty()) {
    curves_file.open(curves_path);
    if (!curves_file) throw std::runtime_error("cannot write " + curves_path);
    curves_file << std::setprecision(8) << "alpha,x_axis,y_axis,curve,point,x,y\n";
  }

  for (double alpha : alphas) {
    QOptions opt;
    opt.decision = DecisionParams::one_d(alpha);
    opt.decision.criterion = parse_criterion(criterion);
    opt.scale_points = scale_points;
    opt.unit = unit;
    const auto values = q_surface(kind, opt, grid);
    for (const auto& v : values) {
      out << kind << ',' << alpha << ',' << v.spec.A << ',' << v.spec.B << ',' << v.spec.beta << ',';
      if (v.excluded) {
        out << "nan,nan\n";
      } else {
        out << v.q1 << ',' << v.q0 << '\n';
      }
    }
    if (!curves_file.is_open()) continue;

    // Level curves of min(Q1, Q0) over the first two axes that vary.
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    if (grid.A.size() > 1) axes.emplace_back("A", grid.A);
    if (grid.B.size() > 1) axes.emplace_back("B", grid.B);
    if (grid.beta.size() > 1) axes.emplace_back("beta", grid.beta);
    if (axes.size() < 2) throw std::invalid_argument("--curves needs two varying parameters");
    const std::size_t na = std::max<std::size_t>(1, grid.A.size());
    const std::size_t nb = std::max<std::size_t>(1, grid.B.size());
    auto flat = [&](std::size_t ia, std::size_t ib, std::size_t ibeta) { return (ibeta * nb + ib) * na + ia; };
    const auto& xs = axes[0].second;
    const auto& ys = axes[1].second;
    std::vector<double> field(xs.size() * ys.size());
    for (std::size_t j = 0; j < ys.size(); ++j) {
      for (std::size_t i = 0; i < xs.size(); ++i) {
        std::size_t idx[3] = {0, 0, 0};  // A, B, beta
        auto put = [&](const std::string& name, std::size_t k) {
          idx[name == "A" ? 0 : name == "B" ? 1 : 2] = k;
        };
        put(axes[0].first, i);
        put(axes[1].first, j);
        const QValue& v = values[flat(idx[0], idx[1], idx[2])];
        field[j * xs.size() + i] = v.excluded ? std::numeric_limits<double>::quiet_NaN() : v.margin();
      }
    }
    const auto lines = zero_level_curves(xs, ys, field);
    for (std::size_t c = 0; c < lines.size(); ++c) {
      for (std::size_t p = 0; p < lines[c].points.size(); ++p) {
        curves_file << alpha << ',' << axes[0].first << ',' << axes[1].first << ',' << c << ',' << p << ','
                    << lines[c].points[p].first << ',' << lines[c].points[p].second << '\n';
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale wavelet edge detection with sparse-scale maxima-line tracking"};
  app.require_subcommand(1);

  // pattern-lab
  auto* lab = app.add_subcommand("pattern-lab", "Reliability values Q1/Q0 over pattern parameters");
  int kind = 3;
  std::vector<double> lab_alphas{0.0};
  std::string criterion = "full", a_range, b_range, beta_range, lab_out, curves_out;
  int scale_points = 50;
  double unit = 1.0;
  lab->add_option("--kind", kind, "Pattern kind 1-6")->check(CLI::Range(1, 6));
  lab->add_option("--alpha", lab_alphas, "One or more alpha values");
  lab->add_option("--criterion", criterion, "full, distance or decay");
  lab->add_option("-A", a_range, "A value or lo:hi:n");
  lab->add_option("-B", b_range, "B value or lo:hi:n");
  lab->add_option("--beta", beta_range, "beta value or lo:hi:n");
  lab->add_option("--scale-points", scale_points);
  lab->add_option("--unit", unit, "Pixels per unit separation (1 = unit coordinates)");
  lab->add_option("-o,--output", lab_out, "CSV path (stdout by default)");
  lab->add_option("--curves", curves_out, "CSV path for the Q = 0 level curves");

  // filter-eval
  auto* feval = app.add_subcommand("filter-eval", "Audit every image row against the dense-scale reference");
  std::string fe_input, fe_out;
  std::vector<double> fe_scales{32, 16, 8, 4};
  double fe_alpha = 0.0;
  feval->add_option("input", fe_input, "Raster (PGM or PNG)")->required()->check(CLI::ExistingFile);
  feval->add_option("--scales", fe_scales, "Dyadic schedule, coarsest first");
  feval->add_option("--alpha", fe_alpha);
  feval->add_option("-o,--output", fe_out);

  // detect
  auto* det = app.add_subcommand("detect", "Multi-scale edge detection");
  std::string det_input, det_out, det_prov, det_threshold = "auto";
  std::vector<double> det_scales{32, 16, 8, 4};
  double det_alpha = 0.0, det_fraction = 0.1;
  std::uint64_t det_seed = 1;
  det->add_option("input", det_input)->required()->check(CLI::ExistingFile);
  det->add_option("--scales", det_scales);
  det->add_option("--alpha", det_alpha);
  det->add_option("-T,--threshold", det_threshold, "Curve score threshold or 'auto'");
  det->add_option("--fraction", det_fraction, "Fraction of each curve traced through the scales");
  det->add_option("--seed", det_seed);
  det->add_option("-o,--output", det_out, "Edge map PGM")->required();
  det->add_option("--provenance", det_prov, "CSV of accepted curve ids and scores");

  // canny
  auto* can = app.add_subcommand("canny", "Single-scale hysteresis baseline");
  std::string can_input, can_out;
  double can_scale = 4.0, can_low = 0.1, can_high = 0.3;
  can->add_option("input", can_input)->required()->check(CLI::ExistingFile);
  can->add_option("--scale", can_scale);
  can->add_option("--low", can_low, "Low threshold as a fraction of max |W|");
  can->add_option("--high", can_high, "High threshold as a fraction of max |W|");
  can->add_option("-o,--output", can_out)->required();

  // phantom
  auto* ph = app.add_subcommand("phantom", "Speckle phantom and its boundary mask from a JSON spec");
  std::string ph_spec, ph_image, ph_truth;
  ph->add_option("spec", ph_spec, "JSON spec")->required()->check(CLI::ExistingFile);
  ph->add_option("--image", ph_image, "Output image PGM")->required();
  ph->add_option("--truth", ph_truth, "Output boundary PGM")->required();

  // fom
  auto* fm = app.add_subcommand("fom", "Pratt figure of merit of an edge map");
  std::string fm_detected, fm_truth;
  double gamma = 0.11;
  fm->add_option("detected", fm_detected)->required()->check(CLI::ExistingFile);
  fm->add_option("truth", fm_truth)->required()->check(CLI::ExistingFile);
  fm->add_option("--gamma", gamma);

  // table
  auto* tab = app.add_subcommand("table", "False-connection or FOM table from a JSON config");
  std::string tab_config, tab_kind = "falseconn", tab_out;
  tab->add_option("config", tab_config)->required()->check(CLI::ExistingFile);
  tab->add_option("--kind", tab_kind, "falseconn or fom")->check(CLI::IsMember({"falseconn", "fom"}));
  tab->add_option("-o,--output", tab_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*lab) {
      return run_pattern_lab(kind, lab_alphas, criterion, a_range, b_range, beta_range, scale_points, unit,
                             lab_out, curves_out);
    }
    if (*feval) {
      const Image2D img = load_raster(fe_input);
      const ScaleSchedule sched = ScaleSchedule::dyadic(fe_scales);
      const ConnectionReport report = row_audit(img, sched, DecisionParams::one_d(fe_alpha));
      std::ofstream file;
      std::ostream& out = open_out(fe_out, file);
      out << std::setprecision(6) << "alpha,coarse,fine,connections,false,false_percent,spatial_error_px\n";
      auto row = [&](const std::string& c, const std::string& f, const PairStats& s) {
        out << fe_alpha << ',' << c << ',' << f << ',' << s.connections << ',' << s.false_connections << ','
            << s.false_percent() << ',' << s.mean_displacement() << '\n';
      };
      for (const auto& s : report.pairs) {
        std::ostringstream c, f;
        c << s.coarse;
        f << s.fine;
        row(c.str(), f.str(), s);
      }
      row("all", "all", report.overall());
      return 0;
    }
    if (*det) {
      const Image2D img = load_raster(det_input);
      DetectorParams dp;
      dp.threshold = parse_threshold(det_threshold);
      dp.subsample_fraction = det_fraction;
      dp.seed = det_seed;
      const EdgeMap edges = detect_2d(img, ScaleSchedule::dyadic(det_scales), DecisionParams::two_d(det_alpha), dp);
      write_raster(edges.to_image(), det_out);
      if (!det_prov.empty()) {
        std::ofstream prov(det_prov);
        if (!prov) throw std::runtime_error("cannot write " + det_prov);
        prov << std::setprecision(10) << "curve_id,score\n";
        for (const auto& a : edges.accepted) prov << a.id << ',' << a.score << '\n';
      }
      std::cerr << edges.accepted.size() << " curves, " << edges.count() << " edge pixels\n";
      return 0;
    }
    if (*can) {
      const EdgeMap edges = canny_baseline(load_raster(can_input), can_scale, can_low, can_high);
      write_raster(edges.to_image(), can_out);
      return 0;
    }
    if (*ph) {
      const json j = read_json(ph_spec);
      const int rows = j.value("rows", 256);
      const int cols = j.value("cols", 256);
      const std::string design = j.value("design", std::string("standard"));
      PhantomSpec spec;
      if (design == "standard") {
        spec.regions = standard_regions(rows, cols);
      } else if (design == "disk") {
        spec.regions = disk_regions(rows, cols, j.value("radius", 0.25 * std::min(rows, cols)),
                                    j.value("inside", 2.0), j.value("outside", 1.0));
      } else {
        throw std::invalid_argument("design must be standard or disk");
      }
      read_psf(j, spec.psf_axial, spec.psf_lateral);
      spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
      spec.seed = j.value("seed", spec.seed);
      const Phantom p = generate_phantom(spec);
      write_raster(scaled_to_unit(p.image), ph_image);
      write_raster(p.truth.to_image(), ph_truth);
      return 0;
    }
    if (*fm) {
      const EdgeMap detected = edge_map_from_image(load_raster(fm_detected));
      const EdgeMap truth = edge_map_from_image(load_raster(fm_truth));
      std::cout << std::setprecision(6) << fom(detected, truth, FomParams{gamma}) << '\n';
      return 0;
    }
    if (*tab) {
      const ExperimentConfig config = read_config(read_json(tab_config));
      const TableKind k = tab_kind == "fom" ? TableKind::Fom : TableKind::FalseConnections;
      std::ofstream file;
      open_out(tab_out, file) << run_table_experiment(k, config);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
