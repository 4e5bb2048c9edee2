#pragma once

#include <cstddef>
#include <functional>

namespace evflow {

/// Worker count: hardware concurrency, capped by the EVFLOW_THREADS env var.
int worker_count();

/// Run fn(begin, end) over [0, n) split into one contiguous chunk per worker.
/// Chunks write disjoint output ranges, so results are thread-count invariant.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace evflow
