#pragma once

#include <cstddef>
#include <functional>

namespace echosim {

/// Runs body(i) for i in [0, count) split into contiguous blocks over
/// `threads` workers (0 picks hardware concurrency). Callers write results
/// into pre-sized slots indexed by i, which keeps output independent of the
/// thread count.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace echosim
