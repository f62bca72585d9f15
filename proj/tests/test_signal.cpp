#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "support.hpp"

using namespace wavedge;
using wavedge::testing::scratch_path;

namespace {

void write_pgm(const std::filesystem::path& p, int w, int h, const std::vector<int>& px, int maxval = 255) {
  std::ofstream out(p, std::ios::binary);
  out << "P5\n# comment\n" << w << ' ' << h << '\n' << maxval << '\n';
  for (int v : px) {
    if (maxval > 255) out.put(static_cast<char>(v >> 8));
    out.put(static_cast<char>(v & 0xff));
  }
}

}  // namespace

TEST(Signal, RejectsShortOrNonFinite) {
  EXPECT_THROW(Signal1D({1.0, 2.0, 3.0}), std::invalid_argument);
  EXPECT_THROW(Signal1D({1.0, 2.0, NAN, 4.0}), std::invalid_argument);
  EXPECT_NO_THROW(Signal1D({1.0, 2.0, 3.0, 4.0}));
}

TEST(Image, RejectsSmallOrMismatched) {
  EXPECT_THROW(Image2D(3, 8), std::invalid_argument);
  EXPECT_THROW(Image2D(4, 4, std::vector<double>(15, 0.0)), std::invalid_argument);
  std::vector<double> px(16, 0.0);
  px[5] = INFINITY;
  EXPECT_THROW(Image2D(4, 4, px), std::invalid_argument);
}

TEST(Image, TransposeSwapsAxes) {
  Image2D img(4, 6);
  img(1, 5) = 3.0;
  const Image2D t = img.transposed();
  EXPECT_EQ(t.rows(), 6);
  EXPECT_EQ(t.cols(), 4);
  EXPECT_EQ(t(5, 1), 3.0);
}

TEST(Schedule, DyadicValidation) {
  EXPECT_NO_THROW(ScaleSchedule::dyadic({32, 16, 8, 4}));
  EXPECT_THROW(ScaleSchedule::dyadic({32, 16, 16, 4}), std::invalid_argument);
  EXPECT_THROW(ScaleSchedule::dyadic({32, 12, 8}), std::invalid_argument);
  EXPECT_THROW(ScaleSchedule::dyadic({4, 8}), std::invalid_argument);
  EXPECT_THROW(ScaleSchedule::dyadic(std::vector<double>{}), std::invalid_argument);
  const auto s = ScaleSchedule::dyadic(4.0, 4);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_DOUBLE_EQ(s.coarsest(), 32.0);
  EXPECT_DOUBLE_EQ(s.finest(), 4.0);
}

TEST(Schedule, SigmaAdjustedDoublesEffectiveWidth) {
  const double sigma = 3.0;
  const auto s = ScaleSchedule::sigma_adjusted(4.0, 4, sigma);
  EXPECT_EQ(s.kind(), ScaleSchedule::Kind::SigmaAdjusted);
  auto eff = [&](double v) { return std::sqrt(v * v + sigma * sigma); };
  for (std::size_t j = 0; j + 1 < s.size(); ++j) {
    EXPECT_NEAR(eff(s.scales()[j]), 2.0 * eff(s.scales()[j + 1]), 1e-9);
  }
  EXPECT_DOUBLE_EQ(s.finest(), 4.0);
}

TEST(Raster, EndpointMapping) {
  const auto p = scratch_path("endpoints.pgm");
  std::vector<int> px(16, 0);
  px[1] = px[2] = 255;
  write_pgm(p, 4, 4, px);
  const Image2D img = load_raster(p);
  EXPECT_EQ(img(0, 0), 0.0);
  EXPECT_EQ(img(0, 1), 1.0);
  EXPECT_EQ(img(0, 2), 1.0);
  EXPECT_EQ(img(0, 3), 0.0);
}

TEST(Raster, SixteenBitAndAscii) {
  const auto p16 = scratch_path("deep.pgm");
  std::vector<int> px(16, 0);
  px[3] = 65535;
  px[4] = 32768;
  write_pgm(p16, 4, 4, px, 65535);
  const Image2D a = load_raster(p16);
  EXPECT_EQ(a(0, 3), 1.0);
  EXPECT_NEAR(a(1, 0), 32768.0 / 65535.0, 1e-12);

  const auto p2 = scratch_path("ascii.pgm");
  {
    std::ofstream out(p2);
    out << "P2\n4 4\n10\n";
    for (int i = 0; i < 16; ++i) out << (i % 11) << ' ';
  }
  const Image2D b = load_raster(p2);
  EXPECT_NEAR(b(0, 1), 0.1, 1e-12);
  EXPECT_NEAR(b(2, 2), 1.0, 1e-12);
}

TEST(Raster, QuantizationRule) {
  Image2D img(4, 4, 0.5);
  img(0, 0) = 1.0;
  img(0, 1) = 1.7;
  img(0, 2) = -0.3;
  const auto p = scratch_path("quant.pgm");
  write_raster(img, p);
  const Image2D back = load_raster(p);
  EXPECT_EQ(back(0, 0), 1.0);
  EXPECT_EQ(back(0, 1), 1.0);
  EXPECT_EQ(back(0, 2), 0.0);
  EXPECT_NEAR(back(1, 1), 128.0 / 255.0, 1e-12);

  Image2D zero(4, 4, 0.0);
  write_raster(zero, p);
  const Image2D blank = load_raster(p);
  for (double v : blank.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(Raster, RoundTripIsExactAfterOneQuantization) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<int> px(37 * 23);
  for (int& v : px) v = byte(rng);
  const auto p = scratch_path("random.pgm");
  write_pgm(p, 37, 23, px);
  const Image2D first = load_raster(p);
  EXPECT_EQ(first.rows(), 23);
  EXPECT_EQ(first.cols(), 37);
  for (double v : first.pixels()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const auto q = scratch_path("random_again.pgm");
  write_raster(first, q);
  const Image2D second = load_raster(q);
  ASSERT_EQ(second.size(), first.size());
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first.pixels()[i], second.pixels()[i]);
}

TEST(Raster, Errors) {
  EXPECT_THROW(load_raster(scratch_path("missing.pgm")), std::runtime_error);
  const auto p = scratch_path("bad.txt");
  {
    std::ofstream out(p);
    out << "hello world";
  }
  EXPECT_THROW(load_raster(p), std::runtime_error);
  const auto z = scratch_path("zero.pgm");
  {
    std::ofstream out(z, std::ios::binary);
    out << "P5\n0 4\n255\n";
  }
  EXPECT_THROW(load_raster(z), std::runtime_error);
  const auto t = scratch_path("truncated.pgm");
  {
    std::ofstream out(t, std::ios::binary);
    out << "P5\n4 4\n255\nabc";
  }
  EXPECT_THROW(load_raster(t), std::runtime_error);
}

TEST(ExtractRow, ValuesAndBounds) {
  Image2D img(4, 5);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c) img(r, c) = 10 * r + c;
  const Signal1D row = extract_row(img, 1);
  ASSERT_EQ(row.size(), 5u);
  for (int c = 0; c < 5; ++c) EXPECT_EQ(row[c], 10 + c);
  EXPECT_THROW(extract_row(img, 4), std::out_of_range);
  EXPECT_THROW(extract_row(img, -1), std::out_of_range);

  Image2D flat(6, 5);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 5; ++c) flat(r, c) = c * 0.5;
  const Signal1D a = extract_row(flat, 0), b = extract_row(flat, 5);
  for (int c = 0; c < 5; ++c) EXPECT_EQ(a[c], b[c]);
}
