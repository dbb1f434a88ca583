#pragma once

#include <cstddef>
#include <functional>

namespace hq {

/// Worker count used by per-node loops. Defaults to 1.
void set_thread_count(int n);
int thread_count();

/// Runs fn(k) for k in [0, count), splitting the range into contiguous
/// chunks across workers. fn must only write node-local state.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace hq
