#include "wavedge/cwt.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wavedge {
namespace {

const double kPiQuarter = std::pow(std::numbers::pi, -0.25);

int kernel_radius(double s) { return static_cast<int>(std::ceil(6.0 * s)); }

void check_scale(double s) {
  if (!(s >= 1.0) || !std::isfinite(s)) {
    throw std::invalid_argument("scale must be >= 1, got " + std::to_string(s));
  }
}

// Offsets [-R-1, R] cover the cell-integrated support [-R-1, R+1].
Kernel make_kernel(double s, auto cell_integral) {
  const int radius = kernel_radius(s);
  Kernel k;
  k.lo = -radius - 1;
  k.taps.resize(2 * radius + 2);
  for (int j = k.lo; j <= radius; ++j) k.taps[j - k.lo] = cell_integral(j);
  return k;
}

void remove_mean(Kernel& k) {
  const double mean = std::accumulate(k.taps.begin(), k.taps.end(), 0.0) / k.taps.size();
  for (double& t : k.taps) t -= mean;
}

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t fft_size(std::size_t n) {
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

// Correlates many equal-length lines against one kernel, reusing plans and spectra.
class LineCorrelator {
 public:
  LineCorrelator(std::size_t length, const Kernel& k)
      : n_(length), kernel_(k), direct_(k.taps.size() < 64) {
    const int reach = std::max(-k.lo, k.hi());
    if (reach >= static_cast<int>(length)) {
      throw std::invalid_argument("signal of length " + std::to_string(length) +
                                  " is shorter than the kernel support (" +
                                  std::to_string(reach) + ")");
    }
    ext_.resize(n_ + k.taps.size() - 1);
    if (direct_) return;

    fft_len_ = fft_size(ext_.size());
    const std::size_t bins = fft_len_ / 2 + 1;
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * fft_len_));
    spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins));
    kspec_.resize(bins);
    {
      std::lock_guard lock(planner_mutex());
      forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(fft_len_), real_, spec_, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(fft_len_), spec_, real_, FFTW_ESTIMATE);
    }
    const std::size_t ntaps = k.taps.size();
    std::fill(real_, real_ + fft_len_, 0.0);
    for (std::size_t i = 0; i < ntaps; ++i) real_[i] = k.taps[ntaps - 1 - i];
    fftw_execute(forward_);
    const double norm = 1.0 / static_cast<double>(fft_len_);
    for (std::size_t b = 0; b < bins; ++b) kspec_[b] = {spec_[b][0] * norm, spec_[b][1] * norm};
  }

  LineCorrelator(const LineCorrelator&) = delete;
  LineCorrelator& operator=(const LineCorrelator&) = delete;

  ~LineCorrelator() {
    if (direct_) return;
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  void apply(std::span<const double> in, std::span<double> out, double offset = 0.0) {
    const int n = static_cast<int>(n_);
    const int lo = kernel_.lo;
    for (std::size_t i = 0; i < ext_.size(); ++i) {
      int t = static_cast<int>(i) + lo;
      if (t < 0) t = -1 - t;
      if (t >= n) t = 2 * n - 1 - t;
      ext_[i] = in[t] - offset;
    }
    const std::size_t ntaps = kernel_.taps.size();
    if (direct_) {
      for (std::size_t u = 0; u < n_; ++u) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ntaps; ++i) acc += ext_[u + i] * kernel_.taps[i];
        out[u] = acc;
      }
      return;
    }
    std::copy(ext_.begin(), ext_.end(), real_);
    std::fill(real_ + ext_.size(), real_ + fft_len_, 0.0);
    fftw_execute(forward_);
    const std::size_t bins = fft_len_ / 2 + 1;
    for (std::size_t b = 0; b < bins; ++b) {
      const std::complex<double> v(spec_[b][0], spec_[b][1]);
      const std::complex<double> p = v * kspec_[b];
      spec_[b][0] = p.real();
      spec_[b][1] = p.imag();
    }
    fftw_execute(backward_);
    for (std::size_t u = 0; u < n_; ++u) out[u] = real_[u + ntaps - 1];
  }

 private:
  std::size_t n_;
  const Kernel& kernel_;
  bool direct_;
  std::vector<double> ext_;
  std::size_t fft_len_ = 0;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  std::vector<std::complex<double>> kspec_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

Image2D correlate_rows(const Image2D& img, const Kernel& k, double offset = 0.0) {
  Image2D out(img.rows(), img.cols());
  LineCorrelator corr(static_cast<std::size_t>(img.cols()), k);
  for (int r = 0; r < img.rows(); ++r) {
    corr.apply(img.row(r), out.pixels().subspan(static_cast<std::size_t>(r) * img.cols(), img.cols()),
               offset);
  }
  return out;
}

Image2D correlate_cols(const Image2D& img, const Kernel& k) {
  return correlate_rows(img.transposed(), k).transposed();
}

}  // namespace

Kernel wavelet_kernel(double s) {
  check_scale(s);
  const double amp = std::sqrt(2.0 * s) * kPiQuarter;
  const double inv = 1.0 / (2.0 * s * s);
  Kernel k = make_kernel(s, [&](int j) {
    return amp * (std::exp(-double(j) * j * inv) - std::exp(-double(j + 1) * (j + 1) * inv));
  });
  remove_mean(k);
  return k;
}

Kernel gradient_kernel(double s) {
  check_scale(s);
  const double amp = s * std::numbers::sqrt2 * kPiQuarter;
  const double inv = 1.0 / (2.0 * s * s);
  Kernel k = make_kernel(s, [&](int j) {
    return amp * (std::exp(-double(j) * j * inv) - std::exp(-double(j + 1) * (j + 1) * inv));
  });
  remove_mean(k);
  return k;
}

Kernel smoothing_kernel(double s) {
  check_scale(s);
  const double amp = kPiQuarter * s * std::sqrt(std::numbers::pi / 2.0);
  const double inv = 1.0 / (s * std::numbers::sqrt2);
  return make_kernel(s, [&](int j) { return amp * (std::erf((j + 1) * inv) - std::erf(j * inv)); });
}

std::vector<double> correlate(std::span<const double> line, const Kernel& k) {
  std::vector<double> out(line.size());
  LineCorrelator corr(line.size(), k);
  corr.apply(line, out);
  return out;
}

double WaveletPlane1D::floor() const {
  double m = 0.0;
  for (double c : coeffs) m = std::max(m, std::abs(c));
  return 1e-6 * m;
}

double WaveletPlane2D::max_modulus() const {
  auto px = modulus.pixels();
  return px.empty() ? 0.0 : *std::max_element(px.begin(), px.end());
}

WaveletPlane1D cwt1d(const Signal1D& f, double s) {
  const Kernel k = wavelet_kernel(s);
  auto samples = f.samples();
  // The kernel sums to zero, so removing the mean changes nothing but round-off.
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  WaveletPlane1D plane;
  plane.scale = s;
  plane.coeffs.resize(f.size());
  LineCorrelator corr(f.size(), k);
  corr.apply(samples, plane.coeffs, mean);
  return plane;
}

WaveletPlane2D cwt2d(const Image2D& f, double s) {
  const Kernel grad = gradient_kernel(s);
  const Kernel smooth = smoothing_kernel(s);
  auto px = f.pixels();
  const double mean = std::accumulate(px.begin(), px.end(), 0.0) / px.size();

  // W^x = (1/sqrt2) s^{-1} sum f psi((x-u)/s) theta((y-v)/s), and W^y by symmetry.
  const double pref = 1.0 / (std::numbers::sqrt2 * s);
  Image2D wx = correlate_cols(correlate_rows(f, grad, mean), smooth);
  Image2D wy = correlate_cols(correlate_rows(f, smooth, mean), grad);

  Image2D modulus(f.rows(), f.cols());
  Image2D angle(f.rows(), f.cols());
  auto x = wx.pixels();
  auto y = wy.pixels();
  auto m = modulus.pixels();
  auto a = angle.pixels();
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] *= pref;
    y[i] *= pref;
    m[i] = std::hypot(x[i], y[i]);
    a[i] = m[i] > 0.0 ? angle_of(x[i], y[i]) : 0.0;
  }
  return WaveletPlane2D{s, std::move(wx), std::move(wy), std::move(modulus), std::move(angle)};
}

double angle_of(double wx, double wy) {
  if (wx == 0.0 && wy == 0.0) throw std::invalid_argument("angle_of: zero gradient");
  if (wx > 0.0) return std::atan(wy / wx);
  if (wx < 0.0) return std::numbers::pi + std::atan(wy / wx);
  return wy > 0.0 ? std::numbers::pi / 2.0 : 1.5 * std::numbers::pi;
}

}  // namespace wavedge
