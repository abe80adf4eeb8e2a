#pragma once

#include <cstdint>
#include <functional>

namespace cvarlab {

/// Worker count: `requested` when positive, else hardware concurrency, both
/// capped by the CVARLAB_THREADS environment variable and by `jobs`.
int resolve_thread_count(int requested, long jobs);

/// Runs fn(i) for i in [0, jobs) on a pool of the resolved size. Exceptions
/// from workers are rethrown on the calling thread (first one wins).
void parallel_for(long jobs, int requested_threads, const std::function<void(long)>& fn);

} // namespace cvarlab
