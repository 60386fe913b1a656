#pragma once

#include <cstddef>
#include <exception>

namespace driftscope {

// Which implementation a data-parallel kernel runs. Every kernel keeps a
// serial reference next to its OpenMP version and both produce bit-identical
// results: parallel loops only write per-index slots and every reduction runs
// afterwards in index order.
enum class Exec { automatic, serial, omp };

void set_num_workers(int workers);
int num_workers();

// automatic resolves to omp when more than one worker is configured.
Exec resolve(Exec exec);

// OpenMP loop over [0, n) that forwards exceptions out of the parallel region.
// When several iterations throw, the one with the lowest index is rethrown, which
// is the error a serial loop would have reported.
template <class Body>
void omp_for(std::ptrdiff_t n, Body&& body) {
    std::exception_ptr error;
    std::ptrdiff_t error_at = n;
#pragma omp parallel for schedule(dynamic) num_threads(num_workers())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(driftscope_omp_for_error)
            {
                if (i < error_at) {
                    error_at = i;
                    error = std::current_exception();
                }
            }
        }
    }
    if (error) std::rethrow_exception(error);
}

} // namespace driftscope
