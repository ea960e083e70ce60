#pragma once

#include <cstddef>
#include <functional>

namespace mrcwpt {

/// `requested` if positive, else MRC_THREADS, else the hardware count.
std::size_t resolve_threads(int requested = 0);

/// Calls fn(i) for i in [0, n) on up to `threads` workers in contiguous
/// chunks. fn must only write to slots owned by i. The first exception thrown
/// by a worker is rethrown here.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace mrcwpt
