#include "wavedge/signal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wavedge {
namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

Signal1D::Signal1D(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 4) {
    throw std::invalid_argument("Signal1D needs at least 4 samples, got " +
                                std::to_string(samples_.size()));
  }
  if (!all_finite(samples_)) throw std::invalid_argument("Signal1D contains non-finite values");
}

Image2D::Image2D(int rows, int cols, std::vector<double> pixels)
    : rows_(rows), cols_(cols), pixels_(std::move(pixels)) {
  if (rows_ < 4 || cols_ < 4) {
    throw std::invalid_argument("Image2D must be at least 4x4, got " + std::to_string(rows_) +
                                "x" + std::to_string(cols_));
  }
  if (pixels_.size() != static_cast<std::size_t>(rows_) * cols_) {
    throw std::invalid_argument("Image2D pixel count does not match rows*cols");
  }
  if (!all_finite(pixels_)) throw std::invalid_argument("Image2D contains non-finite values");
}

Image2D::Image2D(int rows, int cols, double fill)
    : Image2D(rows, cols,
              std::vector<double>(static_cast<std::size_t>(std::max(rows, 0)) *
                                      static_cast<std::size_t>(std::max(cols, 0)),
                                  fill)) {}

Image2D Image2D::transposed() const {
  Image2D t(cols_, rows_);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

ScaleSchedule::ScaleSchedule(Kind kind, double sigma, std::vector<double> scales)
    : kind_(kind), sigma_(sigma), scales_(std::move(scales)) {
  if (scales_.empty()) throw std::invalid_argument("scale schedule is empty");
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (!(scales_[i] > 0.0) || !std::isfinite(scales_[i])) {
      throw std::invalid_argument("scales must be positive and finite");
    }
    if (i > 0 && !(scales_[i] < scales_[i - 1])) {
      throw std::invalid_argument("scales must be strictly decreasing");
    }
  }
  constexpr double kTol = 1e-9;
  for (std::size_t i = 1; i < scales_.size(); ++i) {
    const double coarse = scales_[i - 1];
    const double fine = scales_[i];
    const double lhs = kind_ == Kind::Dyadic ? coarse : std::sqrt(coarse * coarse + sigma_ * sigma_);
    const double rhs = kind_ == Kind::Dyadic ? 2.0 * fine : 2.0 * std::sqrt(fine * fine + sigma_ * sigma_);
    if (std::abs(lhs - rhs) > kTol * rhs) {
      throw std::invalid_argument(kind_ == Kind::Dyadic
                                      ? "dyadic schedule requires s_{j+1} = 2 s_j"
                                      : "sigma-adjusted schedule violates its scale relation");
    }
  }
}

ScaleSchedule ScaleSchedule::dyadic(std::vector<double> scales) {
  return ScaleSchedule(Kind::Dyadic, 0.0, std::move(scales));
}

ScaleSchedule ScaleSchedule::dyadic(double finest, int count) {
  if (count < 1) throw std::invalid_argument("schedule needs at least one scale");
  std::vector<double> s(count);
  for (int i = 0; i < count; ++i) s[i] = finest * std::ldexp(1.0, count - 1 - i);
  return ScaleSchedule(Kind::Dyadic, 0.0, std::move(s));
}

ScaleSchedule ScaleSchedule::sigma_adjusted(double finest, int count, double sigma) {
  if (count < 1) throw std::invalid_argument("schedule needs at least one scale");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  std::vector<double> s(count);
  s[count - 1] = finest;
  for (int i = count - 2; i >= 0; --i) {
    s[i] = std::sqrt(4.0 * s[i + 1] * s[i + 1] + 3.0 * sigma * sigma);
  }
  return ScaleSchedule(Kind::SigmaAdjusted, sigma, std::move(s));
}

Signal1D extract_row(const Image2D& img, int r) {
  if (r < 0 || r >= img.rows()) {
    throw std::out_of_range("row " + std::to_string(r) + " outside [0, " +
                            std::to_string(img.rows()) + ")");
  }
  auto row = img.row(r);
  return Signal1D(std::vector<double>(row.begin(), row.end()));
}

}  // namespace wavedge
