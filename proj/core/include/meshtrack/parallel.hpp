#pragma once

#include <cstddef>
#include <functional>

namespace meshtrack {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Work is split into
// contiguous static chunks, so each index is processed exactly once and the
// assignment does not depend on thread timing. Callers must only write to
// per-index slots; with that discipline results are identical for any worker
// count. workers <= 1 runs inline. Exceptions from fn are rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

int default_workers();

}  // namespace meshtrack
