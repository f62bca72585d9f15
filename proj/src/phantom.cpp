#include "wavedge/phantom.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace wavedge {
namespace {

// Unit-energy Gaussian taps, truncated at 4 standard deviations.
Kernel psf_kernel(double sd) {
  const int radius = static_cast<int>(std::ceil(4.0 * sd));
  Kernel k;
  k.lo = -radius;
  double energy = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    const double v = std::exp(-0.5 * j * j / (sd * sd));
    k.taps.push_back(v);
    energy += v * v;
  }
  for (double& t : k.taps) t /= std::sqrt(energy);
  return k;
}

Image2D blur_rows(const Image2D& img, const Kernel& k) {
  Image2D out(img.rows(), img.cols());
  for (int r = 0; r < img.rows(); ++r) {
    const auto line = correlate(img.row(r), k);
    std::copy(line.begin(), line.end(), out.pixels().begin() + static_cast<std::ptrdiff_t>(r) * img.cols());
  }
  return out;
}

}  // namespace

void PhantomSpec::validate() const {
  if (!(psf_axial > 0.0) || !(psf_lateral > 0.0)) throw std::invalid_argument("PhantomSpec: PSF widths must be > 0");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("PhantomSpec: noise_sigma must be >= 0");
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const Image2D& regions = spec.regions;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Image2D scattering(regions.rows(), regions.cols());
  auto sp = scattering.pixels();
  auto rp = regions.pixels();
  for (std::size_t i = 0; i < sp.size(); ++i) sp[i] = rp[i] * normal(rng);

  // Lateral blur along rows, axial blur along columns.
  const Image2D lateral = blur_rows(scattering, psf_kernel(spec.psf_lateral));
  Image2D image = blur_rows(lateral.transposed(), psf_kernel(spec.psf_axial)).transposed();
  for (double& v : image.pixels()) v = std::abs(v) + spec.noise_sigma * normal(rng);

  return {std::move(image), region_boundaries(regions), std::move(scattering)};
}

EdgeMap region_boundaries(const Image2D& regions) {
  EdgeMap out(regions.rows(), regions.cols());
  for (int y = 0; y < regions.rows(); ++y) {
    for (int x = 0; x < regions.cols(); ++x) {
      const double v = regions(y, x);
      if ((y > 0 && regions(y - 1, x) != v) || (x > 0 && regions(y, x - 1) != v)) out.set(y, x);
    }
  }
  return out;
}

Image2D disk_regions(int rows, int cols, double radius, double inside, double outside) {
  Image2D out(rows, cols, outside);
  const double cy = 0.5 * rows, cx = 0.5 * cols;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      if (std::hypot(y + 0.5 - cy, x + 0.5 - cx) < radius) out(y, x) = inside;
    }
  }
  return out;
}

Image2D standard_regions(int rows, int cols) {
  Image2D out(rows, cols, 1.0);
  struct Disk {
    double cy, cx, r, level;
  };
  const double m = std::min(rows, cols);
  const Disk disks[] = {
      {0.30 * rows, 0.30 * cols, 0.18 * m, 3.0},
      {0.30 * rows, 0.72 * cols, 0.15 * m, 0.2},
      {0.70 * rows, 0.30 * cols, 0.15 * m, 1.6},
      {0.70 * rows, 0.70 * cols, 0.18 * m, 0.6},
  };
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      for (const Disk& d : disks) {
        if (std::hypot(y + 0.5 - d.cy, x + 0.5 - d.cx) < d.r) out(y, x) = d.level;
      }
    }
  }
  return out;
}


Phantom noisy_disk(int rows, int cols, double radius, double inside, double outside, double noise_sigma,
                   std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noisy_disk: noise_sigma must be >= 0");
  Image2D regions = disk_regions(rows, cols, radius, inside, outside);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Image2D image = regions;
  for (double& v : image.pixels()) v += noise_sigma * normal(rng);
  EdgeMap truth = region_boundaries(regions);
  return {std::move(image), std::move(truth), std::move(regions)};
}

}  // namespace wavedge
