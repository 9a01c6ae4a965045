#pragma once

#include <functional>

namespace umblt {

/// Worker count from UMBLT_WORKERS, else 1.
int default_workers();

/// Runs f(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed by exactly one call, so results never depend on the thread count
/// as long as f writes disjoint outputs. The first exception is rethrown.
void parallel_for(int n, int workers, const std::function<void(int)>& f);

/// Pairwise (tree) sum with a fixed association order.
double pairwise_sum(const double* x, long n);

}  // namespace umblt
