#pragma once

#include <cstddef>
#include <functional>

namespace photonstat {

/// Worker cap: PHOTONSTAT_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads.
/// Each index must write only to its own output slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace photonstat
