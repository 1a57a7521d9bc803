#pragma once

#include <cstddef>
#include <functional>

namespace qpspec {

/// Worker count used by the data-parallel loops in this library.  Defaults
/// to the hardware concurrency; 0 restores the default.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads.  Each index
/// is handled exactly once and bodies must only write to per-index state,
/// so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qpspec
