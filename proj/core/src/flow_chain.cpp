#include "meshtrack/flow_chain.hpp"

#include <stdexcept>

namespace meshtrack {

FlowChainCache::FlowChainCache(std::vector<FlowField> forward, std::vector<FlowField> backward)
    : forward_(std::move(forward)), backward_(std::move(backward)) {
  if (forward_.size() != backward_.size())
    throw std::invalid_argument("FlowChainCache: forward/backward pair counts differ");
  if (forward_.empty()) throw std::invalid_argument("FlowChainCache: no pairwise fields");
  for (std::size_t i = 0; i < forward_.size(); ++i)
    if (!forward_[i].same_size(forward_[0]) || !backward_[i].same_size(forward_[0]))
      throw std::invalid_argument("FlowChainCache: field dimension mismatch");
}

const FlowField& FlowChainCache::forward(int pair_index) const {
  if (pair_index < 0 || pair_index >= pair_count())
    throw std::out_of_range("FlowChainCache: missing forward field " + std::to_string(pair_index));
  return forward_[pair_index];
}

const FlowField& FlowChainCache::backward(int pair_index) const {
  if (pair_index < 0 || pair_index >= pair_count())
    throw std::out_of_range("FlowChainCache: missing backward field " +
                            std::to_string(pair_index));
  return backward_[pair_index];
}

const FlowField& FlowChainCache::chain(int from, int to) const {
  if (from == to) throw std::invalid_argument("FlowChainCache::chain: from == to");
  if (from < 0 || from >= frame_count() || to < 0 || to >= frame_count())
    throw std::out_of_range("FlowChainCache::chain: frame index out of range");

  // Single links come straight from the pairwise storage.
  if (to == from + 1) return forward(from);
  if (to == from - 1) return backward(to);

  std::lock_guard<std::mutex> lock(memo_mutex_);
  if (auto it = memo_.find({from, to}); it != memo_.end()) return it->second;

  // Grow the chain one link at a time; every intermediate prefix is
  // memoized too, so later queries from the same origin extend it.
  const int step = to > from ? 1 : -1;
  const FlowField* cur = step > 0 ? &forward(from) : &backward(from - 1);
  for (int k = from + 2 * step; (step > 0 && k <= to) || (step < 0 && k >= to); k += step) {
    const FlowField& link = step > 0 ? forward(k - 1) : backward(k);
    auto it = memo_.find({from, k});
    if (it == memo_.end()) it = memo_.emplace(std::make_pair(from, k), compose_flow(*cur, link)).first;
    cur = &it->second;
  }
  return *cur;
}

Vec2 FlowChainCache::advect_point(Vec2 p, int from, int to) const {
  if (from < 0 || from >= frame_count() || to < 0 || to >= frame_count())
    throw std::out_of_range("FlowChainCache::advect_point: frame index out of range");
  if (from < to)
    for (int k = from; k < to; ++k) p = advect_vertex(p, forward(k));
  else
    for (int k = from; k > to; --k) p = advect_vertex(p, backward(k - 1));
  return p;
}

void FlowChainCache::clear_memo() const {
  std::lock_guard<std::mutex> lock(memo_mutex_);
  memo_.clear();
}

}  // namespace meshtrack
