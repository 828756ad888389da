#pragma once

#include <cstddef>
#include <functional>

namespace loadshape::parallel {

// Upper bound on worker threads used by data-parallel loops. 0 selects
// std::thread::hardware_concurrency(). Results never depend on this value.
void set_max_threads(std::size_t threads);
std::size_t max_threads();

// Calls body(begin, end) over disjoint contiguous chunks covering [0, n).
// Chunks are fixed by n and the thread count only; bodies must write to
// disjoint outputs.
void for_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace loadshape::parallel
