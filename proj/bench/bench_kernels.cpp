// Serial reference kernels against their OpenMP versions. The OpenMP side uses
// omp_get_max_threads() workers, so set OMP_NUM_THREADS to compare thread counts.

#include "driftscope/binarize.hpp"
#include "driftscope/influence.hpp"
#include "driftscope/kernels.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/rashomon.hpp"
#include "driftscope/shapley.hpp"
#include "driftscope/synth.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

using namespace driftscope;

namespace {

RowMatrix gaussian(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    RowMatrix x(n, m);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    return x;
}

void nearest(benchmark::State& state, bool omp) {
    const auto points = gaussian(state.range(0), 8, 1);
    const auto centers = gaussian(32, 8, 2);
    for (auto _ : state) {
        auto r = omp ? kernels::assign_nearest_omp(points, centers, Metric::euclidean)
                     : kernels::assign_nearest_serial(points, centers, Metric::euclidean);
        benchmark::DoNotOptimize(r.index.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["workers"] = omp ? num_workers() : 1;
}

struct InfluenceFixture {
    LogisticModel model;
    LogisticSample train, test;
    explicit InfluenceFixture(std::size_t n) : train(logistic_sample(n, 10, 3)), test(logistic_sample(n, 10, 4)) {
        model = fit_logistic(train.x, train.y);
    }
};

void influence(benchmark::State& state, bool omp) {
    InfluenceFixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto s = omp ? influence_scores_omp(f.model, f.train.x, f.train.y, f.test.x, f.test.y)
                     : influence_scores_serial(f.model, f.train.x, f.train.y, f.test.x, f.test.y);
        benchmark::DoNotOptimize(s.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["workers"] = omp ? num_workers() : 1;
}

struct LifimFixture {
    RashomonEnsemble ensemble;
    RowMatrix rows;
    Background background;
    LifimFixture() {
        const auto pair = synthetic_corpus(0, 400);
        const auto bin = fit_binarizer(pair.d, 8).apply(pair.d);
        EnsembleConfig config;
        ensemble = build_ensemble(bin, config, Exec::serial);
        rows = bin.features();
        background = Background(select_background(bin, 64, 1));
    }
};

void lifim(benchmark::State& state, bool omp) {
    static const LifimFixture f;
    for (auto _ : state) {
        auto m = omp ? lifim_batch_omp(f.ensemble, f.rows, f.background) : lifim_batch_serial(f.ensemble, f.rows, f.background);
        benchmark::DoNotOptimize(m.data());
    }
    state.SetItemsProcessed(state.iterations() * f.rows.rows());
    state.counters["workers"] = omp ? num_workers() : 1;
    }

} // namespace

BENCHMARK_CAPTURE(nearest, serial, false)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(nearest, omp, true)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(influence, serial, false)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(influence, omp, true)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(lifim, serial, false)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(lifim, omp, true)->Unit(benchmark::kMillisecond)->UseRealTime();

int main(int argc, char** argv) {
    set_num_workers(omp_get_max_threads());
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
