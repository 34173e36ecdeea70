#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace tracelab {

/// Worker count from TRACELAB_THREADS, falling back to the hardware count.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Chunks are assigned statically, so any
/// result written to slot i is independent of the number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise summation over a fixed binary tree.
double pairwise_sum(std::span<const double> values);

}  // namespace tracelab
