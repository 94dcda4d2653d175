#ifndef CPFYM_PARALLEL_HPP
#define CPFYM_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace cpfym {

/// Worker count from CPFYM_THREADS (default: hardware concurrency).
int thread_count();

/// Calls body(i) for i in [0, count) on the worker pool. Exceptions are
/// rethrown on the caller after all workers finish (the lowest index wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Neumaier-compensated sum in index order.
double stable_sum(const std::vector<double>& values);

}  // namespace cpfym

#endif  // CPFYM_PARALLEL_HPP
