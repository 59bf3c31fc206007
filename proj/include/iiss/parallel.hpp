#pragma once

#include <cstddef>
#include <functional>

namespace iiss {

/// Calls body(i) for i in [0, n) on up to `threads` workers. Work is split
/// into contiguous blocks, so results written by index do not depend on the
/// thread count. If any call throws, the exception of the smallest index is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Thread count to use when the caller asked for `requested` (0 = hardware).
int resolve_threads(int requested);

}  // namespace iiss
