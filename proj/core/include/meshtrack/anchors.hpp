#pragma once

#include <string>
#include <vector>

#include "meshtrack/error_score.hpp"
#include "meshtrack/matching.hpp"

namespace meshtrack {

// Per-frame appearance-change score: mean error score over the frame's
// feature matches. general_error is +inf when fewer than the minimum number
// of matches contributed, so feature-starved frames can never become anchors.
struct FrameScore {
  int frame = -1;
  double general_error = 0.0;
  int match_count = 0;
};

struct Clip {
  int anchor = -1;
  int begin = 0;  // half-open frame range [begin, end)
  int end = 0;
};

// Anchors plus the contiguous clip each one owns. Clips cover every frame
// exactly once; each frame belongs to its nearest anchor (ties go to the
// earlier anchor), so an anchor sits inside the range it owns.
struct ClipPartition {
  std::vector<int> anchor_indices;  // sorted, always contains the reference
  std::vector<Clip> clips;          // ordered, contiguous

  const Clip& clip_of(int frame) const;
};

struct AnchorPolicy {
  double threshold_cap = 0.05;  // absolute floor of the selection threshold
  double percentile = 20.0;     // of the finite scores
  int min_spacing = 10;         // minimum frames between anchors
  int min_matches = 8;          // below this the frame score is +inf
};

// Mean error score over all match pairs, displacing each reference feature
// by its matched offset. Pairs whose 3x3 neighbourhood leaves the reference
// frame are skipped; match_count counts contributing pairs only.
FrameScore frame_general_error(const Image& ref, const Image& target,
                               const FeatureMatchSet& matches, const ErrorWeights& weights = {},
                               int min_matches = 8);

// Anchors are the strict local minima of the score curve that fall below
// max(threshold_cap, percentile of finite scores), greedily accepted in
// ascending score order under the spacing constraint. The reference frame is
// always an anchor. Scores must cover frames 0..n-1 in order.
ClipPartition select_anchor_frames(const std::vector<FrameScore>& scores, int reference_index,
                                   const AnchorPolicy& policy = {});

// Text report, one line per clip: "anchor=<idx> range=[a,b)".
void write_partition_report(const ClipPartition& partition, const std::string& path);
// CSV of per-frame scores: frame,general_error,match_count.
void write_score_csv(const std::vector<FrameScore>& scores, const std::string& path);

}  // namespace meshtrack
