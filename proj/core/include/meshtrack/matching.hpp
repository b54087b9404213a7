#pragma once

#include <vector>

#include "meshtrack/features.hpp"

namespace meshtrack {

struct RawMatch {
  int reference_index = -1;
  int target_index = -1;
  double distance = 0.0;  // Euclidean descriptor distance
};

// One matched pair that survived the ratio test and outlier rejection.
// Indices refer back to the detection lists the pair came from.
struct MatchPair {
  Feature reference;
  Feature target;
  double distance = 0.0;
  int reference_index = -1;
  int target_index = -1;

  Vec2 displacement() const { return target.position - reference.position; }
};

struct FeatureMatchSet {
  int target_frame = -1;
  std::vector<MatchPair> pairs;
};

// Nearest-neighbour descriptor matching, one-to-one by mutual best match,
// with the ratio test applied in both directions so the result is symmetric
// under swapping the two lists. Empty inputs give an empty result.
std::vector<RawMatch> match_features(const std::vector<Feature>& reference,
                                     const std::vector<Feature>& target, double ratio = 0.8);

// Keeps exactly the pairs whose position displacement is strictly below tau
// pixels. tau must be positive.
FeatureMatchSet reject_outliers(const std::vector<RawMatch>& matches,
                                const std::vector<Feature>& reference,
                                const std::vector<Feature>& target, double tau, int target_frame);

}  // namespace meshtrack
