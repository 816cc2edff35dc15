// Index-space parallel_for capped by the MESHRES_THREADS environment
// variable (default 1). Work items write to disjoint slots, so results are
// identical for any thread count.
#pragma once

#include <cstddef>
#include <functional>

namespace meshres {

int thread_cap();

void parallel_for(size_t n, const std::function<void(size_t)>& fn);

} // namespace meshres
