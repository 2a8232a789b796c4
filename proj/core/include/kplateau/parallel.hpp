#pragma once

#include <cstddef>
#include <functional>

namespace kp {

/// Worker count from KP_THREADS (0 or unset = hardware concurrency).
int thread_count();

/// Runs body(i) for i in [0, n). Each index is handled exactly once; callers write
/// results into per-index slots so the outcome does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace kp
