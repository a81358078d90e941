#pragma once

#include <cstdint>
#include <functional>

namespace voxdet {

/// Hardware concurrency, never less than 1.
int default_thread_count();

/// Runs body(begin, end) over a contiguous partition of [0, n). Each index is
/// visited exactly once by exactly one invocation, so any computation whose
/// per-index result does not depend on the partition produces bit-identical
/// output for every thread count. threads <= 1 executes inline.
void parallel_for_chunks(std::int64_t n, int threads,
                         const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace voxdet
