#pragma once

#include <array>
#include <string>
#include <vector>

#include "meshtrack/geometry.hpp"
#include "meshtrack/image.hpp"

namespace meshtrack {

constexpr int kDescriptorSize = 128;

// Scale/rotation-invariant keypoint with a gradient-orientation-histogram
// descriptor of unit Euclidean norm.
struct Feature {
  Vec2 position;
  double scale = 0.0;        // sigma in input-image pixels
  double orientation = 0.0;  // radians
  std::array<float, kDescriptorSize> descriptor{};
};

struct DetectorParams {
  int intervals = 3;               // DoG scales searched per octave
  double sigma = 1.6;              // base scale of the first octave
  double assumed_blur = 0.5;       // blur assumed in the input image
  double contrast_threshold = 0.04;
  double edge_threshold = 10.0;    // principal-curvature ratio cutoff
  int max_octaves = 8;
  int max_orientations = 2;        // secondary orientation peaks kept
};

// Difference-of-Gaussians scale-space extrema with subpixel refinement and
// histogram descriptors. Output is sorted by (y, x, scale, orientation) so
// detection is deterministic. Requires dimensions >= 16x16.
std::vector<Feature> detect_features(const Image& img, const DetectorParams& params = {});

// Binary feature cache, one file per frame: uint32 count, then per feature
// position (x, y), scale, orientation and the descriptor, all little-endian
// float32.
void write_feature_cache(const std::vector<Feature>& features, const std::string& path);
std::vector<Feature> read_feature_cache(const std::string& path);

}  // namespace meshtrack
