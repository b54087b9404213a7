#include "meshtrack/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "meshtrack/errors.hpp"

namespace meshtrack {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

Image load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw InputError("cannot open image: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("malformed PNG: " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  // Normalize everything to 8-bit gray or RGB.
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<std::uint8_t> data(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = data.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  return Image::from_bytes(data.data(), int(w), int(h), channels);
}

void skip_pnm_whitespace(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") throw InputError("not a PGM file: " + path);
  skip_pnm_whitespace(in);
  int w = 0, h = 0, maxval = 0;
  in >> w;
  skip_pnm_whitespace(in);
  in >> h;
  skip_pnm_whitespace(in);
  in >> maxval;
  if (!in || w < 3 || h < 3 || maxval <= 0 || maxval > 65535)
    throw InputError("malformed PGM header: " + path);

  Image img(w, h);
  const double inv = 1.0 / maxval;
  if (magic == "P2") {
    for (int i = 0; i < w * h; ++i) {
      long v = 0;
      in >> v;
      img.data()[i] = float(v * inv);
    }
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<std::uint8_t> raw(std::size_t(w) * h * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
    if (!in) throw InputError("truncated PGM: " + path);
    for (int i = 0; i < w * h; ++i) {
      const long v = bytes == 1 ? raw[i] : (raw[2 * i] << 8 | raw[2 * i + 1]);
      img.data()[i] = float(v * inv);
    }
  }
  if (!in) throw InputError("truncated PGM: " + path);
  return img;
}

std::uint8_t quantize(double v) {
  return std::uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_png(const std::string& path, const std::vector<std::uint8_t>& data,
               int width, int height, int color_type, int channels) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw InputError("cannot write image: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(data.data() + std::size_t(y) * width * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Image load_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "png") return load_png(path);
  if (ext == "pgm") return load_pgm(path);
  throw InputError("unsupported image format (want .png or .pgm): " + path);
}

void save_png_gray(const Image& img, const std::string& path) {
  std::vector<std::uint8_t> data(std::size_t(img.width()) * img.height());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = quantize(img.data()[i]);
  write_png(path, data, img.width(), img.height(), PNG_COLOR_TYPE_GRAY, 1);
}

void save_png_rgb(const Image& r, const Image& g, const Image& b, const std::string& path) {
  if (!r.same_size(g) || !r.same_size(b))
    throw std::invalid_argument("save_png_rgb: plane size mismatch");
  std::vector<std::uint8_t> data(std::size_t(r.width()) * r.height() * 3);
  for (std::size_t i = 0, n = std::size_t(r.width()) * r.height(); i < n; ++i) {
    data[3 * i + 0] = quantize(r.data()[i]);
    data[3 * i + 1] = quantize(g.data()[i]);
    data[3 * i + 2] = quantize(b.data()[i]);
  }
  write_png(path, data, r.width(), r.height(), PNG_COLOR_TYPE_RGB, 3);
}

std::pair<int, int> probe_image_size(const std::string& path) {
  const std::string ext = lower_ext(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image: " + path);
  if (ext == "png") {
    // 8-byte signature, then the IHDR chunk: length, "IHDR", width, height.
    std::uint8_t head[24];
    in.read(reinterpret_cast<char*>(head), sizeof(head));
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (!in || std::memcmp(head, sig, 8) != 0 || std::memcmp(head + 12, "IHDR", 4) != 0)
      throw InputError("malformed PNG: " + path);
    const auto be32 = [&](int off) {
      return int(head[off]) << 24 | int(head[off + 1]) << 16 | int(head[off + 2]) << 8 |
             int(head[off + 3]);
    };
    return {be32(16), be32(20)};
  }
  if (ext == "pgm") {
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P2") throw InputError("not a PGM file: " + path);
    skip_pnm_whitespace(in);
    int w = 0, h = 0;
    in >> w;
    skip_pnm_whitespace(in);
    in >> h;
    if (!in) throw InputError("malformed PGM header: " + path);
    return {w, h};
  }
  throw InputError("unsupported image format: " + path);
}

void save_pgm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write image: " + path);
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<std::uint8_t> row(img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) row[x] = quantize(img.at(x, y));
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
}

}  // namespace meshtrack
