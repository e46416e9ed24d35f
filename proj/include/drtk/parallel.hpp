#pragma once

#include <cstddef>
#include <functional>

namespace drtk {

// Worker count: hardware concurrency capped by the DRTK_THREADS environment
// variable (when set to a positive integer). Always >= 1.
std::size_t thread_count();

// Calls body(i) for i in [0, n). Indices are split into contiguous blocks, one
// per worker. body must only write to state owned by index i; callers merge
// per-index results sequentially afterwards, so output never depends on the
// number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace drtk
