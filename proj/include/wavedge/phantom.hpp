#pragma once

#include <cstdint>

#include "wavedge/detector.hpp"

namespace wavedge {

/// Speckle phantom: each pixel scatters with standard deviation equal to its
/// region level, the scattering is blurred by a Gaussian point-spread function,
/// envelope-detected (absolute value) and white noise is added.
struct PhantomSpec {
  Image2D regions{4, 4};
  /// PSF standard deviations in pixels: axial runs along rows (y), lateral along columns (x).
  double psf_axial = 2.0;
  double psf_lateral = 4.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Phantom {
  Image2D image;
  /// Region boundaries on the transform lattice (see `region_boundaries`).
  EdgeMap truth;
  /// Pre-blur scattering field, level * N(0, 1) per pixel.
  Image2D scattering;
};

Phantom generate_phantom(const PhantomSpec& spec);

/// Pixel (x, y) lies on a boundary when its left or upper neighbour has a different
/// level. A step between columns x-1 and x therefore marks column x, where the
/// transform places its maximum, and diagonal boundaries stay 8-connected.
EdgeMap region_boundaries(const Image2D& regions);

/// Level `inside` within radius `radius` of the image centre, `outside` elsewhere.
Image2D disk_regions(int rows, int cols, double radius, double inside, double outside);

/// Disk of level `inside` on `outside` plus white Gaussian noise, without speckle.
/// The returned scattering field is the noise-free region image.
Phantom noisy_disk(int rows, int cols, double radius, double inside, double outside, double noise_sigma,
                   std::uint64_t seed);

/// Unit background with four disks: strong and weak hyperechoic, strong and weak hypoechoic.
Image2D standard_regions(int rows, int cols);

}  // namespace wavedge
