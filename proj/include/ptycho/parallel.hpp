#pragma once

#include <cstddef>
#include <exception>
#include <limits>

namespace ptycho {

/// Applies PTYCHO_THREADS (0 or unset = runtime default) to the worker pool.
/// Returns the number of workers in effect.
int configure_threads();

/// Runs fn(i) for i in [0, n). Iterations must write disjoint outputs; reductions
/// stay with the caller so results do not depend on the worker count.
/// If iterations throw, the exception from the lowest index is rethrown after the loop.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn)
{
#if defined(PTYCHO_USE_OPENMP)
    std::exception_ptr error;
    std::size_t error_index = std::numeric_limits<std::size_t>::max();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(ptycho_parallel_for_error)
            if (static_cast<std::size_t>(i) < error_index) {
                error_index = static_cast<std::size_t>(i);
                error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
#else
    for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace ptycho
