#pragma once

#include <cstddef>
#include <functional>

namespace rswave {

/// Worker count: `requested` if positive, else RSWAVE_WORKERS, else hardware concurrency.
int resolve_workers(int requested = 0);

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be
/// written to per-index slots so that output does not depend on scheduling.
/// The first exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace rswave
