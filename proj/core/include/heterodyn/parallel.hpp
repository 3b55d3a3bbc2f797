#pragma once

#include <cstddef>
#include <functional>

namespace heterodyn {

// Worker count used by replica- and row-parallel loops. Defaults to the
// HETERODYN_THREADS environment variable, else 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Calls body(i) for i in [0, n) on up to thread_count() workers. Work is split
// into contiguous chunks, so results written to slot i do not depend on the
// worker count. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace heterodyn
