#pragma once

#include <cstddef>
#include <functional>

namespace umw {

/// Worker count: `requested` if positive, else UMWKIT_THREADS if set and
/// positive, else the hardware concurrency (at least 1).
int resolve_threads(int requested = 0);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Indices are
/// handed out dynamically; the first exception thrown is rethrown after all
/// workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace umw
