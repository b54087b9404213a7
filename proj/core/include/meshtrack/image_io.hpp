#pragma once

#include <string>
#include <utility>

#include "meshtrack/image.hpp"

namespace meshtrack {

// Decodes a PNG (8/16-bit gray or color, converted to luminance) or a binary
// or ASCII PGM. Format is picked by extension (.png / .pgm). Throws
// InputError on missing or malformed files.
Image load_image(const std::string& path);

// 8-bit grayscale PNG; intensities are clamped to [0,1] then quantized.
void save_png_gray(const Image& img, const std::string& path);

// 8-bit RGB PNG from three planes (used by the overlay renderer).
void save_png_rgb(const Image& r, const Image& g, const Image& b, const std::string& path);

void save_pgm(const Image& img, const std::string& path);

// Reads only the header and returns (width, height).
std::pair<int, int> probe_image_size(const std::string& path);

}  // namespace meshtrack
