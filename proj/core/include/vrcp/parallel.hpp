#pragma once

#include <cstddef>
#include <functional>

namespace vrcp {

/// Runs fn(0..n-1) on up to `threads` workers (1 = inline). Each index is
/// visited exactly once; if any call throws, the exception of the lowest
/// failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace vrcp
