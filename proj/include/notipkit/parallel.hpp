#pragma once

#include <cstddef>
#include <functional>

namespace notip {

/// Caps the number of worker threads used by library kernels. 0 restores the default
/// (hardware concurrency).
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Calls made from inside a worker run serially. Indices are split into contiguous chunks, one per worker.
/// body must only write to state owned by index i; results are therefore independent of
/// the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace notip
