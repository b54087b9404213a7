#include "meshtrack/matching.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace meshtrack {

namespace {

// Four partial sums in float keep the accumulation order fixed (bitwise
// deterministic) while letting the compiler vectorize the hot loop.
double distance2(const Feature& a, const Feature& b) {
  float acc0 = 0, acc1 = 0, acc2 = 0, acc3 = 0;
  for (int i = 0; i < kDescriptorSize; i += 4) {
    const float d0 = a.descriptor[i] - b.descriptor[i];
    const float d1 = a.descriptor[i + 1] - b.descriptor[i + 1];
    const float d2 = a.descriptor[i + 2] - b.descriptor[i + 2];
    const float d3 = a.descriptor[i + 3] - b.descriptor[i + 3];
    acc0 += d0 * d0;
    acc1 += d1 * d1;
    acc2 += d2 * d2;
    acc3 += d3 * d3;
  }
  return double((acc0 + acc1) + (acc2 + acc3));
}

struct Nearest {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  double second_d2 = std::numeric_limits<double>::infinity();

  void offer(int index, double d2) {
    if (d2 < best_d2) {
      second_d2 = best_d2;
      best_d2 = d2;
      best = index;
    } else if (d2 < second_d2) {
      second_d2 = d2;
    }
  }

  bool passes_ratio(double ratio) const {
    if (best < 0) return false;
    if (second_d2 == std::numeric_limits<double>::infinity()) return true;  // lone feature
    if (second_d2 <= 0.0) return false;  // duplicate descriptors, ambiguous
    return best_d2 < ratio * ratio * second_d2;
  }
};

}  // namespace

std::vector<RawMatch> match_features(const std::vector<Feature>& reference,
                                     const std::vector<Feature>& target, double ratio) {
  std::vector<RawMatch> out;
  if (reference.empty() || target.empty()) return out;

  std::vector<Nearest> ref_nn(reference.size());
  std::vector<Nearest> tgt_nn(target.size());
  for (int i = 0; i < int(reference.size()); ++i)
    for (int j = 0; j < int(target.size()); ++j) {
      const double d2 = distance2(reference[i], target[j]);
      ref_nn[i].offer(j, d2);
      tgt_nn[j].offer(i, d2);
    }

  for (int i = 0; i < int(reference.size()); ++i) {
    const int j = ref_nn[i].best;
    if (j < 0 || tgt_nn[j].best != i) continue;
    if (!ref_nn[i].passes_ratio(ratio) || !tgt_nn[j].passes_ratio(ratio)) continue;
    out.push_back({i, j, std::sqrt(ref_nn[i].best_d2)});
  }
  return out;
}

FeatureMatchSet reject_outliers(const std::vector<RawMatch>& matches,
                                const std::vector<Feature>& reference,
                                const std::vector<Feature>& target, double tau, int target_frame) {
  if (!(tau > 0.0)) throw std::invalid_argument("reject_outliers: tau must be positive");
  FeatureMatchSet set;
  set.target_frame = target_frame;
  for (const RawMatch& m : matches) {
    const Feature& fr = reference.at(m.reference_index);
    const Feature& ft = target.at(m.target_index);
    if (distance(fr.position, ft.position) < tau)
      set.pairs.push_back({fr, ft, m.distance, m.reference_index, m.target_index});
  }
  return set;
}

}  // namespace meshtrack
