#pragma once

#include <cstddef>
#include <functional>

namespace mfg {

/// Worker count for `jobs` independent tasks: hardware concurrency, capped by
/// the MFG_EVOLVE_THREADS environment variable when it holds a positive
/// integer, and never more than `jobs`.
std::size_t worker_count(std::size_t jobs);

/// Runs task(i) for i in [0, jobs) on up to worker_count(jobs) threads.
/// Tasks must write only to their own slot of a caller-owned result array.
/// The first exception thrown by a task is rethrown after all workers join.
void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& task);

}  // namespace mfg
