#pragma once

#include <cstddef>
#include <functional>

namespace perpsim {

/// Runs fn(0..n-1) on up to `jobs` worker threads (0 = hardware concurrency).
/// Iterations must be independent; exceptions are rethrown on the caller.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

} // namespace perpsim
