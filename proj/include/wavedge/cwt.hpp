#pragma once

#include <vector>

#include "wavedge/signal.hpp"

namespace wavedge {

/// Discrete correlation kernel: `taps[i]` weights the sample at offset `lo + i`.
struct Kernel {
  int lo = 0;
  std::vector<double> taps;

  int hi() const { return lo + static_cast<int>(taps.size()) - 1; }
  double at(int offset) const {
    return offset < lo || offset > hi() ? 0.0 : taps[offset - lo];
  }
};

/// Cell-integrated 1-D wavelet kernel: tap j is the integral of
/// s^{-1/2} psi(x/s) over [j, j+1), psi(t) = sqrt(2) pi^{-1/4} t e^{-t^2/2}.
/// Truncated at radius 6s and corrected to exact zero sum. A step on a cell boundary
/// is transformed exactly; a step inside a cell gets the linear interpolation between
/// its two neighbouring boundaries.
Kernel wavelet_kernel(double s);

/// Cell-integrated smoothing kernel theta(y/s) = pi^{-1/4} e^{-y^2/(2 s^2)}, truncated at 6s.
Kernel smoothing_kernel(double s);

/// Cell-integrated derivative kernel psi(x/s) without the s^{-1/2} factor (2-D x/y pass).
Kernel gradient_kernel(double s);

/// out[u] = sum_j ext[u + j] * k.taps[j - lo] with half-sample mirror extension.
/// Uses FFT convolution for long kernels and direct summation below 64 taps.
std::vector<double> correlate(std::span<const double> line, const Kernel& k);

struct WaveletPlane1D {
  double scale = 0.0;
  std::vector<double> coeffs;
  /// Cleanup floor for mod-max detection (1e-6 of the largest |coeff|).
  double floor() const;
};

struct WaveletPlane2D {
  double scale = 0.0;
  Image2D wx;
  Image2D wy;
  Image2D modulus;
  /// Orientation in (-pi/2, 3pi/2]; zero where the gradient vanishes.
  Image2D angle;

  int rows() const { return wx.rows(); }
  int cols() const { return wx.cols(); }
  double max_modulus() const;
};

/// Wf(u, s) on the integer grid. Throws for s < 1 or when the kernel
/// radius is not smaller than the signal length.
WaveletPlane1D cwt1d(const Signal1D& f, double s);

/// s * grad(f * theta_s) via separable passes; mirror boundaries.
WaveletPlane2D cwt2d(const Image2D& f, double s);

/// Af = atan(wy/wx) for wx >= 0, pi + atan(wy/wx) for wx < 0; wx == 0 maps to pi/2 or 3pi/2.
double angle_of(double wx, double wy);

}  // namespace wavedge
