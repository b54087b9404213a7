#pragma once

#include <string>
#include <vector>

#include "meshtrack/error_score.hpp"
#include "meshtrack/matching.hpp"
#include "meshtrack/mesh.hpp"

namespace meshtrack {

// A mesh vertex anchored at a verified position on a non-reference frame.
// Only candidates whose error score stays below eta are ever emitted, so a
// patch can override flow-propagated positions later.
struct AnchorPatch {
  int vertex_id = -1;
  int frame = -1;
  Vec2 position;
  double score = 0.0;
};

struct PatchParams {
  double eta = 0.08;             // error-score acceptance threshold
  double search_radius = 5.0;    // initial nearest-feature search radius (px)
  double max_search_radius = 40.0;  // radius doubles until this cap
};

// Spatial hash over matched reference-feature positions, built once per
// frame set and shared read-only by parallel labeling workers.
class FeatureGrid {
 public:
  FeatureGrid(const std::vector<MatchPair>& pairs, double cell_size);

  // Indices of the k nearest pairs within `radius` of p (ordered by
  // distance, ties by index). Fewer than k means not enough were in range.
  std::vector<int> nearest(const Vec2& p, int k, double radius) const;

 private:
  const std::vector<MatchPair>& pairs_;
  double cell_size_;
  int cols_ = 0, rows_ = 0;
  double min_x_ = 0.0, min_y_ = 0.0;
  std::vector<std::vector<int>> cells_;
};

// Labels anchor patches for every mesh vertex on one (non-anchor) frame:
// the three nearest matched features are found with an expanding radius,
// mapped through the barycentric combination, and kept only when the
// mapping's error score is strictly below eta. Vertices with too few
// features or a degenerate triple are skipped. At most one patch per vertex.
std::vector<AnchorPatch> label_anchor_patches(const TriangleMesh& mesh,
                                              const FeatureMatchSet& matches, const Image& ref,
                                              const Image& target, const PatchParams& params = {},
                                              const ErrorWeights& weights = {});

// Debug dump: frame,vertex_id,x,y,score.
void write_patch_csv(const std::vector<std::vector<AnchorPatch>>& per_frame,
                     const std::string& path);

}  // namespace meshtrack
