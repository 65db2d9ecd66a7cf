#pragma once

#include <cstddef>
#include <functional>

namespace ssr {

// Worker count: SSR_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

// Calls f(i) for i in [0, n) across worker threads.  Results must be written
// to per-index slots; the first exception thrown is rethrown after all
// workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace ssr
