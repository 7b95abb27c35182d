#pragma once

#include <cstddef>
#include <functional>

namespace wot {

/// Number of worker threads used by the library. 0 means hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Calls body(i) for i in [0, n) across worker threads with static
/// contiguous chunks. Callers write results by index, so the output does not
/// depend on the thread count. The first exception thrown by any body is
/// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wot
