#include "meshtrack/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace meshtrack {

Image::Image(int width, int height, float fill)
    : width_(width), height_(height) {
  if (width < 3 || height < 3)
    throw std::invalid_argument("Image: dimensions must be at least 3x3");
  data_.assign(std::size_t(width) * height, fill);
}

double Image::sample(double x, double y) const {
  x = std::clamp(x, 0.0, double(width_ - 1));
  y = std::clamp(y, 0.0, double(height_ - 1));
  const int x0 = std::min(int(x), width_ - 2);
  const int y0 = std::min(int(y), height_ - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = at(x0, y0);
  const double v10 = at(x0 + 1, y0);
  const double v01 = at(x0, y0 + 1);
  const double v11 = at(x0 + 1, y0 + 1);
  return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
         fy * ((1.0 - fx) * v01 + fx * v11);
}

Image Image::from_bytes(const std::uint8_t* bytes, int width, int height, int channels) {
  Image img(width, height);
  const double inv = 1.0 / 255.0;
  for (std::size_t i = 0, n = std::size_t(width) * height; i < n; ++i) {
    const std::uint8_t* px = bytes + i * channels;
    double v = 0.0;
    switch (channels) {
      case 1:
        v = px[0] * inv;
        break;
      case 3:
      case 4:
        v = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) * inv;
        break;
      default:
        throw std::invalid_argument("Image::from_bytes: unsupported channel count");
    }
    img.data_[i] = float(v);
  }
  return img;
}

}  // namespace meshtrack
