#include "driftscope/parallel.hpp"

#include <algorithm>
#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace driftscope {

namespace {
std::atomic<int> g_workers{1};
}

void set_num_workers(int workers) {
    g_workers.store(std::max(1, workers));
}

int num_workers() {
    return g_workers.load();
}

Exec resolve(Exec exec) {
    if (exec != Exec::automatic) return exec;
#ifdef _OPENMP
    return num_workers() > 1 ? Exec::omp : Exec::serial;
#else
    return Exec::serial;
#endif
}

} // namespace driftscope
