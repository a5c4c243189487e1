#ifndef SUBFLOW_PARALLEL_HPP
#define SUBFLOW_PARALLEL_HPP

#include <functional>

namespace subflow {

/// Worker cap: SUBFLOW_THREADS if set (>=1), otherwise hardware concurrency
/// clamped to 8.
int max_threads();

/// Splits [0,n) into contiguous slabs and runs `body(begin,end)` on each.
/// Only point-local writes are allowed in the body; reductions stay serial
/// elsewhere so results are independent of the thread count.
void parallel_for(int n, const std::function<void(int, int)>& body);

}  // namespace subflow

#endif  // SUBFLOW_PARALLEL_HPP
