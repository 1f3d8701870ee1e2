#pragma once

#include <cstddef>
#include <functional>

namespace reefseg {

/// Worker count used by the fitters. 0 or 1 means run on the calling thread.
/// Initialised from REEFSEG_THREADS on first use; may be overridden.
std::size_t worker_threads();
void set_worker_threads(std::size_t count);

/// Calls body(begin, end) over contiguous chunks of [0, n). Chunks are
/// disjoint; callers only write per-index outputs inside the body and do any
/// cross-index reduction afterwards in index order, so results do not depend
/// on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace reefseg
