#pragma once

#include <cstddef>
#include <functional>

namespace crpd {

// Worker-thread count for parallel sections: CRPD_NUM_THREADS when set
// (0 or unset means hardware concurrency).
int worker_count();

// Runs fn(0..count-1), possibly concurrently. Items must write only their
// own output slots; results are then identical for every worker count and
// schedule. The first exception thrown by an item is rethrown after all
// workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  int workers = worker_count());

}  // namespace crpd
