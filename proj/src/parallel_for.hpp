#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>

namespace matflow::detail {

// Runs body(i) for i in [0, count) across OpenMP threads. Each index is owned
// by one thread, so results written to index-addressed slots are identical for
// any thread count. The first exception (by index) is rethrown after the loop.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    std::exception_ptr first;
    std::size_t first_index = count;
    const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(matflow_parallel_for)
            {
                if (static_cast<std::size_t>(i) < first_index) {
                    first_index = static_cast<std::size_t>(i);
                    first = std::current_exception();
                }
            }
        }
    }
    if (first) std::rethrow_exception(first);
}

} // namespace matflow::detail
