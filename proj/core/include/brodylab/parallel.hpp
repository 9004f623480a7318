#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace brodylab {

/// Worker count: BRODYLAB_THREADS if set, else logical cores.
int thread_count();

/// Runs f(i) for i in [0, n). Each index must touch only its own output
/// slot; the split across workers never affects results.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

/// Left-to-right pairwise summation; bit-stable for a fixed input order
/// regardless of thread count (reductions are done after the parallel
/// phase, on a materialized vector).
double pairwise_sum(std::span<const double> values);

}  // namespace brodylab
