#pragma once

#include <cstddef>
#include <functional>

namespace rashgam {

/// Worker cap used by the library. Defaults to RASHGAM_THREADS when set,
/// otherwise the hardware concurrency.
int max_threads();
void set_max_threads(int n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread cap, so callers that write per-index
/// results and reduce afterwards get identical output for any scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace rashgam
