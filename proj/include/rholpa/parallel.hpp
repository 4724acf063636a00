#pragma once

#include <cstddef>
#include <functional>

namespace rholpa {

/// Worker count: RHOLPA_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned thread_count();

/// Runs body(i) for i in [0, count) on thread_count() workers. Each index is
/// processed exactly once; the first exception thrown is rethrown after all
/// workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace rholpa
