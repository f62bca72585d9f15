#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

#include "wavedge/signal.hpp"

namespace wavedge {
namespace {

std::runtime_error io_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int parse_positive(const std::string& tok, const std::filesystem::path& path, const char* field) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v < 0 || v > 1 << 24) throw std::invalid_argument(field);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw io_error(path, std::string("malformed PGM header field '") + field + "'");
  }
}

Image2D read_pgm(std::ifstream& in, const std::filesystem::path& path, bool binary) {
  const int cols = parse_positive(next_token(in), path, "width");
  const int rows = parse_positive(next_token(in), path, "height");
  const int maxval = parse_positive(next_token(in), path, "maxval");
  if (rows == 0 || cols == 0) throw io_error(path, "zero-sized image");
  if (maxval == 0 || maxval > 65535) throw io_error(path, "unsupported maxval");

  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  std::vector<double> px(n);
  const double scale = 1.0 / maxval;
  if (binary) {
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bpp);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw io_error(path, "truncated pixel data");
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = bpp == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
      px[i] = std::min(v * scale, 1.0);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string tok = next_token(in);
      if (tok.empty()) throw io_error(path, "truncated pixel data");
      px[i] = std::min(parse_positive(tok, path, "pixel") * scale, 1.0);
    }
  }
  return Image2D(rows, cols, std::move(px));
}

struct PngReadDeleter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadDeleter() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

Image2D read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw io_error(path, "cannot open");

  PngReadDeleter guard;
  guard.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!guard.png) throw io_error(path, "libpng initialisation failed");
  guard.info = png_create_info_struct(guard.png);
  if (!guard.info) throw io_error(path, "libpng initialisation failed");

  std::vector<unsigned char> buffer;
  std::vector<png_bytep> row_ptrs;
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;

  if (setjmp(png_jmpbuf(guard.png))) throw io_error(path, "corrupt PNG");

  png_init_io(guard.png, fp.get());
  png_read_info(guard.png, guard.info);
  png_get_IHDR(guard.png, guard.info, &width, &height, &bit_depth, &color_type, nullptr, nullptr,
               nullptr);
  if ((color_type & PNG_COLOR_MASK_COLOR) != 0) throw io_error(path, "color PNG not supported");
  if (width == 0 || height == 0) throw io_error(path, "zero-sized image");
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(guard.png);
  if ((color_type & PNG_COLOR_MASK_ALPHA) != 0) png_set_strip_alpha(guard.png);
  png_read_update_info(guard.png, guard.info);

  const std::size_t rowbytes = png_get_rowbytes(guard.png, guard.info);
  buffer.resize(rowbytes * height);
  row_ptrs.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) row_ptrs[r] = buffer.data() + r * rowbytes;
  png_read_image(guard.png, row_ptrs.data());

  const int rows = static_cast<int>(height);
  const int cols = static_cast<int>(width);
  std::vector<double> px(static_cast<std::size_t>(rows) * cols);
  const bool wide = bit_depth == 16;
  const double scale = wide ? 1.0 / 65535.0 : 1.0 / 255.0;
  for (int r = 0; r < rows; ++r) {
    const unsigned char* src = row_ptrs[r];
    for (int c = 0; c < cols; ++c) {
      const unsigned v = wide ? (unsigned{src[2 * c]} << 8) | src[2 * c + 1] : src[c];
      px[static_cast<std::size_t>(r) * cols + c] = v * scale;
    }
  }
  return Image2D(rows, cols, std::move(px));
}

}  // namespace

Image2D load_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path, "cannot open");
  char magic[8] = {};
  in.read(magic, 8);
  if (in.gcount() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(magic), 0, 8) == 0) {
    in.close();
    return read_png(path);
  }
  if (in.gcount() < 2 || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '2')) {
    throw io_error(path, "unsupported format (expected PGM P2/P5 or PNG)");
  }
  in.clear();
  in.seekg(2);
  return read_pgm(in, path, magic[1] == '5');
}

void write_raster(const Image2D& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path, "cannot open for writing");
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::vector<unsigned char> bytes(img.size());
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double v = std::clamp(px[i], 0.0, 1.0);
    bytes[i] = static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error(path, "write failed");
}

}  // namespace wavedge
