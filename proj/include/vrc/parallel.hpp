#pragma once

#include <cstddef>
#include <functional>

namespace vrc {

/// Caps worker threads used by parallel_for. 0 means hardware concurrency.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(begin, end) over disjoint chunks of [0, n). Each index is visited
/// exactly once, so results are independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1);

}  // namespace vrc
