#pragma once

#include <functional>

#include "qdl/specfun.hpp"

namespace qdl {

// Worker count from the QDLMOM_WORKERS environment variable when set to a
// positive integer (clamped to 256), otherwise the hardware concurrency,
// never less than 1.
int default_workers();

// Deterministic parallel reduction of sum_{i=0}^{n-1} f(i). The index range
// is cut into fixed 4096-wide blocks; each block is accumulated with
// compensated (Kahan) addition, and block totals are combined in block order
// with compensation again. The result is therefore bit-identical for every
// worker count, including 1. Exceptions thrown by f are rethrown in the
// calling thread. workers <= 0 means default_workers().
cplx parallel_sum(long long n, const std::function<cplx(long long)>& f,
                  int workers = 0);

// Runs f(i) for i in [0, n) across workers (dynamic chunks). Deterministic
// as long as each invocation writes only to its own slot. Exceptions are
// rethrown in the calling thread.
void parallel_for(long long n, const std::function<void(long long)>& f,
                  int workers = 0);

}  // namespace qdl
