#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support.hpp"
#include "wavedge/cwt.hpp"

using namespace wavedge;
using wavedge::testing::step_peak;
using wavedge::testing::step_signal;
using wavedge::testing::vertical_step;

namespace {

// Least-squares slope of ln|W| at the step against ln s.
double decay_slope(const std::vector<double>& scales, const std::vector<double>& peaks) {
  const double n = static_cast<double>(scales.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double x = std::log(scales[i]), y = std::log(peaks[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(Kernels, WaveletSumsToZero) {
  for (double s : {1.0, 2.5, 4.0, 16.0, 64.0}) {
    const Kernel k = wavelet_kernel(s);
    EXPECT_NEAR(std::accumulate(k.taps.begin(), k.taps.end(), 0.0), 0.0, 1e-12) << s;
    EXPECT_LE(k.hi(), static_cast<int>(std::ceil(6 * s)) + 1);
  }
}

TEST(Cwt, ConstantSignalVanishes) {
  const Signal1D f(std::vector<double>(256, 3.7));
  for (double s : {2.0, 8.0, 32.0}) {
    for (double c : cwt1d(f, s).coeffs) EXPECT_NEAR(c, 0.0, 1e-9);
  }
}

TEST(Cwt, HeavisideMatchesClosedForm) {
  const int n = 1024, at = 512;
  const Signal1D f = step_signal(n, at);
  for (double s : {4.0, 8.0, 16.0, 32.0}) {
    const auto plane = cwt1d(f, s);
    const double expected = step_peak(s);
    EXPECT_NEAR(plane.coeffs[at], expected, 0.01 * expected) << "s=" << s;
    for (int du : {-2, -1, 1, 2}) {
      const double near = expected * std::exp(-du * du / (2 * s * s));
      EXPECT_NEAR(plane.coeffs[at + du], near, 0.015 * expected) << "s=" << s << " du=" << du;
    }
  }
}

TEST(Cwt, StepDecaySlopeIsOneHalf) {
  const Signal1D f = step_signal(1024, 512);
  std::vector<double> scales{4, 8, 16, 32}, peaks;
  for (double s : scales) peaks.push_back(std::abs(cwt1d(f, s).coeffs[512]));
  EXPECT_NEAR(decay_slope(scales, peaks), 0.5, 0.02);
}

TEST(Cwt, Linearity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> a(300), b(300), mix(300);
  for (int i = 0; i < 300; ++i) {
    a[i] = g(rng);
    b[i] = g(rng);
    mix[i] = 2.0 * a[i] - 0.5 * b[i];
  }
  const auto wa = cwt1d(Signal1D(a), 6.0), wb = cwt1d(Signal1D(b), 6.0), wm = cwt1d(Signal1D(mix), 6.0);
  for (int i = 0; i < 300; ++i) EXPECT_NEAR(wm.coeffs[i], 2.0 * wa.coeffs[i] - 0.5 * wb.coeffs[i], 1e-9);
}

TEST(Cwt, ShiftCovariance) {
  const Signal1D f = step_signal(512, 200), g = step_signal(512, 237);
  const auto wf = cwt1d(f, 8.0), wg = cwt1d(g, 8.0);
  for (int u = 100; u < 350; ++u) EXPECT_NEAR(wg.coeffs[u + 37], wf.coeffs[u], 1e-9);
}

TEST(Cwt, RejectsBadScales) {
  const Signal1D f = step_signal(64, 32);
  EXPECT_THROW(cwt1d(f, 0.5), std::invalid_argument);
  EXPECT_THROW(cwt1d(f, 16.0), std::invalid_argument);
}

TEST(Cwt2d, VerticalStepIsSeparable) {
  const Image2D img = vertical_step(64, 128, 64);
  for (double s : {4.0, 8.0}) {
    const auto plane = cwt2d(img, s);
    const Signal1D row = extract_row(img, 0);
    const auto line = cwt1d(row, s);
    // The 2-D normalization differs from the 1-D one by sqrt(s) and the smoothing integral.
    const double scale_2d = plane.wx(32, 64) / line.coeffs[64];
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 128; ++c) {
        EXPECT_NEAR(plane.wy(r, c), 0.0, 1e-9);
        EXPECT_NEAR(plane.wx(r, c), scale_2d * line.coeffs[c], 1e-9);
      }
    }
    EXPECT_NEAR(plane.angle(32, 64), 0.0, 1e-12);
  }
}

TEST(Cwt2d, StepDecaySlopeIsOne) {
  const Image2D img = vertical_step(256, 256, 128);
  std::vector<double> scales{4, 8, 16, 32}, peaks;
  for (double s : scales) peaks.push_back(cwt2d(img, s).modulus(128, 128));
  EXPECT_NEAR(decay_slope(scales, peaks), 1.0, 0.05);
}

TEST(Cwt2d, TransposeSymmetry) {
  Image2D img(40, 56);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u;
  for (double& v : img.pixels()) v = u(rng);
  const auto a = cwt2d(img, 3.0), b = cwt2d(img.transposed(), 3.0);
  for (int r = 0; r < 40; ++r) {
    for (int c = 0; c < 56; ++c) {
      EXPECT_NEAR(a.wx(r, c), b.wy(c, r), 1e-9);
      EXPECT_NEAR(a.wy(r, c), b.wx(c, r), 1e-9);
      EXPECT_NEAR(a.modulus(r, c), b.modulus(c, r), 1e-9);
    }
  }
}

TEST(Cwt2d, ConstantImageVanishes) {
  const auto plane = cwt2d(Image2D(32, 32, 0.4), 4.0);
  EXPECT_NEAR(plane.max_modulus(), 0.0, 1e-9);
}

TEST(Angle, Convention) {
  EXPECT_NEAR(angle_of(1.0, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(angle_of(-1.0, 0.0), M_PI, 1e-15);
  EXPECT_NEAR(angle_of(1.0, 1.0), M_PI / 4, 1e-15);
  EXPECT_NEAR(angle_of(-1.0, -1.0), 5 * M_PI / 4, 1e-15);
  EXPECT_NEAR(angle_of(0.0, 1.0), M_PI / 2, 1e-15);
  EXPECT_NEAR(angle_of(0.0, -1.0), 3 * M_PI / 2, 1e-15);
  EXPECT_NEAR(angle_of(1.0, -1.0), -M_PI / 4, 1e-15);
}
