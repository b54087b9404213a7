#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "meshtrack/anchors.hpp"
#include "meshtrack/rng.hpp"

using namespace meshtrack;

namespace {

std::vector<FrameScore> make_scores(const std::vector<double>& values) {
  std::vector<FrameScore> scores;
  for (int i = 0; i < int(values.size()); ++i) scores.push_back({i, values[i], 100});
  return scores;
}

FeatureMatchSet self_matches(const Image& img, int frame, int count) {
  FeatureMatchSet set;
  set.target_frame = frame;
  for (int i = 0; i < count; ++i) {
    Feature f;
    f.position = {2.0 + i % (img.width() - 4), 2.0 + (i * 7) % (img.height() - 4)};
    set.pairs.push_back({f, f, 0.0, i, i});
  }
  return set;
}

}  // namespace

TEST_CASE("general error is zero for a frame identical to the reference") {
  Image img(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) img.at(x, y) = float((x * 13 + y * 7) % 17 / 17.0);
  const FrameScore score = frame_general_error(img, img, self_matches(img, 3, 20));
  CHECK(score.frame == 3);
  CHECK(score.match_count == 20);
  CHECK(score.general_error == 0.0);
}

TEST_CASE("general error is the arithmetic mean of pair scores") {
  // Craft three matches whose individual scores are known by direct
  // evaluation, then check the mean.
  Image ref(32, 32, 0.5f);
  Image tgt(32, 32, 0.5f);
  tgt.at(5, 5) = 0.9f;
  tgt.at(15, 15) = 0.7f;
  FeatureMatchSet set;
  set.target_frame = 1;
  for (const auto& p : {Vec2{5, 5}, Vec2{15, 15}, Vec2{25, 25}}) {
    Feature f;
    f.position = p;
    set.pairs.push_back({f, f, 0.0, 0, 0});
  }
  double expected = 0.0;
  for (const auto& p : {Vec2{5, 5}, Vec2{15, 15}, Vec2{25, 25}})
    expected += error_score(ref, tgt, p, {0, 0});
  expected /= 3.0;
  const FrameScore score = frame_general_error(ref, tgt, set, {}, 3);
  CHECK(score.general_error == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("frames with too few matches get the infinite sentinel") {
  Image img(16, 16, 0.5f);
  const FrameScore score = frame_general_error(img, img, self_matches(img, 0, 5), {}, 8);
  CHECK(score.match_count == 5);
  CHECK(std::isinf(score.general_error));
}

TEST_CASE("thresholded local minima become anchors") {
  const auto scores = make_scores({0, 5, 6, 0.1, 7});
  AnchorPolicy policy;
  policy.threshold_cap = 0.5;
  policy.percentile = 0.0;  // cap only
  policy.min_spacing = 2;
  const ClipPartition part = select_anchor_frames(scores, 0, policy);
  CHECK(part.anchor_indices == std::vector<int>{0, 3});
  REQUIRE(part.clips.size() == 2);
  CHECK(part.clips[0].begin == 0);
  CHECK(part.clips[1].end == 5);
}

TEST_CASE("all scores above threshold degenerates to the single reference clip") {
  const auto scores = make_scores({0, 5, 6, 4, 7});
  AnchorPolicy policy;
  policy.threshold_cap = 0.5;
  policy.percentile = 0.0;
  const ClipPartition part = select_anchor_frames(scores, 0, policy);
  CHECK(part.anchor_indices == std::vector<int>{0});
  REQUIRE(part.clips.size() == 1);
  CHECK(part.clips[0].begin == 0);
  CHECK(part.clips[0].end == 5);
}

TEST_CASE("infinite-score frames are never selected") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto scores = make_scores({0, 5, inf, 5, 0.01, 5});
  AnchorPolicy policy;
  policy.threshold_cap = 1.0;
  policy.percentile = 0.0;
  policy.min_spacing = 1;
  const ClipPartition part = select_anchor_frames(scores, 0, policy);
  for (int a : part.anchor_indices) CHECK(a != 2);
  CHECK(std::count(part.anchor_indices.begin(), part.anchor_indices.end(), 4) == 1);
}

TEST_CASE("partition properties hold on random score curves") {
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 20 + int(rng.uniform_index(80));
    std::vector<double> values(n);
    for (double& v : values) v = rng.uniform(0.0, 1.0);
    AnchorPolicy policy;
    policy.threshold_cap = rng.uniform(0.05, 0.5);
    policy.percentile = rng.uniform(0.0, 50.0);
    policy.min_spacing = 1 + int(rng.uniform_index(15));
    const ClipPartition part = select_anchor_frames(make_scores(values), 0, policy);

    // reference always present
    CHECK(std::count(part.anchor_indices.begin(), part.anchor_indices.end(), 0) == 1);
    // pairwise spacing
    for (std::size_t i = 0; i < part.anchor_indices.size(); ++i)
      for (std::size_t j = i + 1; j < part.anchor_indices.size(); ++j)
        CHECK(std::abs(part.anchor_indices[i] - part.anchor_indices[j]) >= policy.min_spacing);
    // clips partition [0, n) contiguously and each anchor owns its clip
    CHECK(part.clips.front().begin == 0);
    CHECK(part.clips.back().end == n);
    for (std::size_t c = 0; c < part.clips.size(); ++c) {
      const Clip& clip = part.clips[c];
      CHECK(clip.begin < clip.end);
      CHECK(clip.anchor >= clip.begin);
      CHECK(clip.anchor < clip.end);
      if (c > 0) CHECK(clip.begin == part.clips[c - 1].end);
      CHECK(part.clip_of(clip.anchor).anchor == clip.anchor);
    }
    // every frame belongs to its nearest anchor (ties to the earlier one)
    for (int f = 0; f < n; ++f) {
      const Clip& owner = part.clip_of(f);
      for (int a : part.anchor_indices) {
        const int own_dist = std::abs(f - owner.anchor);
        const int other = std::abs(f - a);
        CHECK(own_dist <= other + 0);
        if (other == own_dist && a != owner.anchor) CHECK(owner.anchor < a);
      }
    }
  }
}

TEST_CASE("lowering the threshold never adds anchors") {
  Rng rng(321);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 40;
    std::vector<double> values(n);
    for (double& v : values) v = rng.uniform(0.0, 1.0);
    AnchorPolicy high, low;
    high.percentile = low.percentile = 0.0;
    high.min_spacing = low.min_spacing = 3;
    high.threshold_cap = 0.6;
    low.threshold_cap = 0.25;
    const auto anchors_high = select_anchor_frames(make_scores(values), 0, high).anchor_indices;
    const auto anchors_low = select_anchor_frames(make_scores(values), 0, low).anchor_indices;
    for (int a : anchors_low)
      CHECK(std::count(anchors_high.begin(), anchors_high.end(), a) == 1);
  }
}
