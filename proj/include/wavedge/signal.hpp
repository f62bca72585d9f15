#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace wavedge {

/// A sampled 1-D intensity profile with unit sample spacing.
///
/// Sample `t` is taken to cover the cell `[t, t + 1)`, so a jump between
/// samples `t - 1` and `t` sits at position `t`. All transforms and mod-max
/// positions in this library use that convention.
class Signal1D {
 public:
  explicit Signal1D(std::vector<double> samples);

  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  std::span<const double> samples() const { return samples_; }

 private:
  std::vector<double> samples_;
};

/// Row-major real grid. Row index is image y, column index is image x.
class Image2D {
 public:
  Image2D(int rows, int cols, std::vector<double> pixels);
  Image2D(int rows, int cols, double fill = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return pixels_.size(); }

  double operator()(int r, int c) const { return pixels_[index(r, c)]; }
  double& operator()(int r, int c) { return pixels_[index(r, c)]; }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }
  std::span<const double> row(int r) const {
    return std::span<const double>(pixels_).subspan(index(r, 0), cols_);
  }

  Image2D transposed() const;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_;
  int cols_;
  std::vector<double> pixels_;
};

/// Descending list of analysis scales, coarsest first.
class ScaleSchedule {
 public:
  enum class Kind { Dyadic, SigmaAdjusted };

  /// Validates that `scales` is strictly decreasing, positive and dyadic.
  static ScaleSchedule dyadic(std::vector<double> scales);
  /// `count` dyadic scales ending at `finest`: {finest*2^(count-1), ..., finest}.
  static ScaleSchedule dyadic(double finest, int count);
  /// Scales with sqrt(s_{j+1}^2 + sigma^2) = 2 sqrt(s_j^2 + sigma^2).
  static ScaleSchedule sigma_adjusted(double finest, int count, double sigma);

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  std::span<const double> scales() const { return scales_; }
  std::size_t size() const { return scales_.size(); }
  double coarsest() const { return scales_.front(); }
  double finest() const { return scales_.back(); }

 private:
  ScaleSchedule(Kind kind, double sigma, std::vector<double> scales);

  Kind kind_;
  double sigma_;
  std::vector<double> scales_;
};

/// Reads an 8/16-bit grayscale PGM (P2/P5) or grayscale PNG, mapping values to [0, 1].
Image2D load_raster(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM; values are clamped to [0, 1] and quantized by round(v*255).
void write_raster(const Image2D& img, const std::filesystem::path& path);

Signal1D extract_row(const Image2D& img, int r);

}  // namespace wavedge
