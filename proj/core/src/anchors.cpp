#include "meshtrack/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "meshtrack/errors.hpp"

namespace meshtrack {

const Clip& ClipPartition::clip_of(int frame) const {
  for (const Clip& c : clips)
    if (frame >= c.begin && frame < c.end) return c;
  throw std::out_of_range("ClipPartition::clip_of: frame outside partition");
}

FrameScore frame_general_error(const Image& ref, const Image& target,
                               const FeatureMatchSet& matches, const ErrorWeights& weights,
                               int min_matches) {
  FrameScore score;
  score.frame = matches.target_frame;
  double sum = 0.0;
  int count = 0;
  for (const MatchPair& pair : matches.pairs) {
    if (!error_score_in_bounds(ref, pair.reference.position)) continue;
    sum += error_score(ref, target, pair.reference.position, pair.displacement(), weights);
    ++count;
  }
  score.match_count = count;
  score.general_error =
      count >= min_matches ? sum / count : std::numeric_limits<double>::infinity();
  return score;
}

ClipPartition select_anchor_frames(const std::vector<FrameScore>& scores, int reference_index,
                                   const AnchorPolicy& policy) {
  const int n = int(scores.size());
  if (n == 0) throw std::invalid_argument("select_anchor_frames: empty score list");
  for (int i = 0; i < n; ++i)
    if (scores[i].frame != i)
      throw std::invalid_argument("select_anchor_frames: scores must cover frames in order");
  if (reference_index < 0 || reference_index >= n)
    throw std::invalid_argument("select_anchor_frames: reference index out of range");

  // Selection threshold: the given percentile of finite scores, floored by
  // the absolute cap.
  std::vector<double> finite;
  for (const FrameScore& s : scores)
    if (std::isfinite(s.general_error)) finite.push_back(s.general_error);
  double threshold = policy.threshold_cap;
  if (!finite.empty()) {
    std::sort(finite.begin(), finite.end());
    const double rank = policy.percentile / 100.0 * (finite.size() - 1);
    const std::size_t lo = std::size_t(rank);
    const std::size_t hi = std::min(lo + 1, finite.size() - 1);
    const double frac = rank - double(lo);
    const double pct = finite[lo] * (1.0 - frac) + finite[hi] * frac;
    threshold = std::max(policy.threshold_cap, pct);
  }

  // Strict local minima below the threshold (single-sided at the ends).
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i) {
    if (i == reference_index) continue;
    const double v = scores[i].general_error;
    if (!std::isfinite(v) || v >= threshold) continue;
    const bool left_ok = i == 0 || v < scores[i - 1].general_error;
    const bool right_ok = i == n - 1 || v < scores[i + 1].general_error;
    if (left_ok && right_ok) candidates.push_back(i);
  }

  // Greedy acceptance by ascending score keeps the best minima when the
  // spacing constraint forces a choice.
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    const double sa = scores[a].general_error, sb = scores[b].general_error;
    return sa != sb ? sa < sb : a < b;
  });
  std::vector<int> anchors{reference_index};
  for (int c : candidates) {
    bool ok = true;
    for (int a : anchors)
      if (std::abs(c - a) < policy.min_spacing) {
        ok = false;
        break;
      }
    if (ok) anchors.push_back(c);
  }
  std::sort(anchors.begin(), anchors.end());

  // Nearest-anchor clip ownership, ties to the earlier anchor: the boundary
  // between consecutive anchors a < b is the midpoint, frames at equal
  // distance staying with a.
  ClipPartition part;
  part.anchor_indices = anchors;
  int begin = 0;
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    int end;
    if (k + 1 == anchors.size()) {
      end = n;
    } else {
      const int a = anchors[k], b = anchors[k + 1];
      end = a + (b - a) / 2 + 1;  // last frame with dist(a) <= dist(b), plus one
    }
    part.clips.push_back({anchors[k], begin, end});
    begin = end;
  }
  return part;
}

void write_partition_report(const ClipPartition& partition, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write partition report: " + path);
  for (const Clip& c : partition.clips)
    out << "anchor=" << c.anchor << " range=[" << c.begin << "," << c.end << ")\n";
}

void write_score_csv(const std::vector<FrameScore>& scores, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write score csv: " + path);
  out << "frame,general_error,match_count\n";
  for (const FrameScore& s : scores) {
    out << s.frame << ",";
    if (std::isfinite(s.general_error))
      out << s.general_error;
    else
      out << "inf";
    out << "," << s.match_count << "\n";
  }
}

}  // namespace meshtrack
