#pragma once

#include <cstddef>
#include <functional>

namespace parax {

/// Worker count from PARAX_THREADS, else hardware concurrency (at least 1).
int default_thread_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers, each taking a
/// contiguous block. Exceptions are rethrown (first block wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace parax
