#pragma once

#include <cstddef>
#include <functional>

namespace aeq {

// Worker count from AE_NUM_THREADS; 0, unset or unparsable means all cores.
std::size_t worker_count();

// Calls body(i) for every i in [0, n) across worker_count() threads. Work is
// split into contiguous chunks; callers write results into per-index slots so
// the outcome never depends on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace aeq
