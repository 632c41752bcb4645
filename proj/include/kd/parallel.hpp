#pragma once

#include <cstddef>
#include <functional>

namespace kd {

//! Worker count: KD_THREADS if set to a positive integer, otherwise the
//! hardware concurrency (at least 1).
std::size_t worker_count();

//! Calls body(i) for i in [0, n) on up to worker_count() threads.  Work items
//! are handed out in index order; callers write results into slot i so the
//! assembled output does not depend on scheduling.  The first exception
//! thrown by any item is rethrown after all workers finished.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace kd
