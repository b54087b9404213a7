#pragma once

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "meshtrack/flow_field.hpp"

namespace meshtrack {

// Holds the pairwise forward/backward fields of a sequence and memoizes
// composed long-range fields. Pairwise fields are immutable once stored;
// chain() allows concurrent readers with exclusive memoization writes, and a
// memoized entry is always bit-identical to recomputing it from scratch.
class FlowChainCache {
 public:
  FlowChainCache(std::vector<FlowField> forward, std::vector<FlowField> backward);

  // Movable for setup-time handoff only; never move a cache other threads
  // are reading.
  FlowChainCache(FlowChainCache&& o) noexcept
      : forward_(std::move(o.forward_)),
        backward_(std::move(o.backward_)),
        memo_(std::move(o.memo_)) {}
  FlowChainCache& operator=(FlowChainCache&&) = delete;
  FlowChainCache(const FlowChainCache&) = delete;

  int pair_count() const { return int(forward_.size()); }
  int frame_count() const { return pair_count() + 1; }

  // w_{i -> i+1}
  const FlowField& forward(int pair_index) const;
  // w_{i+1 -> i}
  const FlowField& backward(int pair_index) const;

  // Left-to-right fold of compose_flow over the pairwise fields between
  // `from` and `to` (forward fields when from < to, backward when from > to).
  // Requires from != to and all pairwise fields in between.
  const FlowField& chain(int from, int to) const;

  // Moves a single point stepwise through the pairwise fields from frame
  // `from` to frame `to` (identity when from == to). Pointwise this equals
  // advecting through the composed chain evaluated exactly at the point, and
  // costs no field-sized intermediates.
  Vec2 advect_point(Vec2 p, int from, int to) const;

  void clear_memo() const;

 private:
  std::vector<FlowField> forward_;
  std::vector<FlowField> backward_;
  mutable std::map<std::pair<int, int>, FlowField> memo_;
  mutable std::mutex memo_mutex_;
};

}  // namespace meshtrack
