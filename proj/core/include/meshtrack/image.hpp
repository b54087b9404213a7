#pragma once

#include <cstdint>
#include <vector>

#include "meshtrack/geometry.hpp"

namespace meshtrack {

// Single-channel intensity grid in [0, 1], row-major. Storage is float to
// keep long sequences in memory; all sampling arithmetic is done in double.
// Minimum size is 3x3 so a full 3x3 neighborhood always exists somewhere.
class Image {
 public:
  Image() = default;
  Image(int width, int height, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }

  float at(int x, int y) const { return data_[std::size_t(y) * width_ + x]; }
  float& at(int x, int y) { return data_[std::size_t(y) * width_ + x]; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool same_size(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

  // Clamped bilinear sample: coordinates outside [0,w-1]x[0,h-1] are pulled
  // to the border, interior samples interpolate the four surrounding pixels.
  // Reproduces pixel values exactly at integer coordinates.
  double sample(double x, double y) const;
  double sample(const Vec2& p) const { return sample(p.x, p.y); }

  // Luminance conversion of interleaved 8-bit data (0.299 R + 0.587 G +
  // 0.114 B); channels = 1 copies, 3 converts, 4 ignores alpha.
  static Image from_bytes(const std::uint8_t* bytes, int width, int height, int channels);

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

}  // namespace meshtrack
