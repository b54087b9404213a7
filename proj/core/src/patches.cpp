#include "meshtrack/patches.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "meshtrack/barycentric.hpp"
#include "meshtrack/errors.hpp"

namespace meshtrack {

FeatureGrid::FeatureGrid(const std::vector<MatchPair>& pairs, double cell_size)
    : pairs_(pairs), cell_size_(std::max(cell_size, 1.0)) {
  if (pairs_.empty()) return;
  double max_x = min_x_ = pairs_[0].reference.position.x;
  double max_y = min_y_ = pairs_[0].reference.position.y;
  for (const MatchPair& p : pairs_) {
    min_x_ = std::min(min_x_, p.reference.position.x);
    min_y_ = std::min(min_y_, p.reference.position.y);
    max_x = std::max(max_x, p.reference.position.x);
    max_y = std::max(max_y, p.reference.position.y);
  }
  cols_ = int((max_x - min_x_) / cell_size_) + 1;
  rows_ = int((max_y - min_y_) / cell_size_) + 1;
  cells_.resize(std::size_t(cols_) * rows_);
  for (int i = 0; i < int(pairs_.size()); ++i) {
    const Vec2& p = pairs_[i].reference.position;
    const int cx = int((p.x - min_x_) / cell_size_);
    const int cy = int((p.y - min_y_) / cell_size_);
    cells_[std::size_t(cy) * cols_ + cx].push_back(i);
  }
}

std::vector<int> FeatureGrid::nearest(const Vec2& p, int k, double radius) const {
  std::vector<std::pair<double, int>> in_range;
  if (!cells_.empty()) {
    const int cx0 = std::max(0, int((p.x - radius - min_x_) / cell_size_));
    const int cy0 = std::max(0, int((p.y - radius - min_y_) / cell_size_));
    const int cx1 = std::min(cols_ - 1, int((p.x + radius - min_x_) / cell_size_));
    const int cy1 = std::min(rows_ - 1, int((p.y + radius - min_y_) / cell_size_));
    const double r2 = radius * radius;
    for (int cy = cy0; cy <= cy1; ++cy)
      for (int cx = cx0; cx <= cx1; ++cx)
        for (int i : cells_[std::size_t(cy) * cols_ + cx]) {
          const double d2 = (pairs_[i].reference.position - p).norm2();
          if (d2 <= r2) in_range.emplace_back(d2, i);
        }
  }
  std::sort(in_range.begin(), in_range.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < in_range.size() && int(i) < k; ++i)
    out.push_back(in_range[i].second);
  return out;
}

std::vector<AnchorPatch> label_anchor_patches(const TriangleMesh& mesh,
                                              const FeatureMatchSet& matches, const Image& ref,
                                              const Image& target, const PatchParams& params,
                                              const ErrorWeights& weights) {
  std::vector<AnchorPatch> patches;
  if (matches.pairs.size() < 3) return patches;

  const FeatureGrid grid(matches.pairs, params.search_radius);
  for (int vid = 0; vid < int(mesh.vertices.size()); ++vid) {
    const Vec2& v = mesh.vertices[vid];
    if (!error_score_in_bounds(ref, v)) continue;

    std::vector<int> picked;
    for (double radius = params.search_radius; radius <= params.max_search_radius;
         radius *= 2.0) {
      picked = grid.nearest(v, 3, radius);
      if (picked.size() == 3) break;
    }
    if (picked.size() != 3) continue;

    const MatchPair& m1 = matches.pairs[picked[0]];
    const MatchPair& m2 = matches.pairs[picked[1]];
    const MatchPair& m3 = matches.pairs[picked[2]];
    const auto triple = solve_barycentric(m1.reference.position, m2.reference.position,
                                          m3.reference.position, v);
    if (!triple) continue;

    Vec2 mapped = map_vertex(*triple, m1.target.position, m2.target.position, m3.target.position);
    mapped.x = std::clamp(mapped.x, 0.0, double(target.width() - 1));
    mapped.y = std::clamp(mapped.y, 0.0, double(target.height() - 1));

    const double score = error_score(ref, target, v, mapped - v, weights);
    if (score < params.eta)
      patches.push_back({vid, matches.target_frame, mapped, score});
  }
  return patches;
}

void write_patch_csv(const std::vector<std::vector<AnchorPatch>>& per_frame,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write patch csv: " + path);
  out << "frame,vertex_id,x,y,score\n";
  char buf[128];
  for (const auto& frame_patches : per_frame)
    for (const AnchorPatch& p : frame_patches) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", p.frame, p.vertex_id,
                    p.position.x, p.position.y, p.score);
      out << buf;
    }
}

}  // namespace meshtrack
