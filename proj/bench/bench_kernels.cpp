// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "mettrials/approx_optimizer.hpp"
#include "mettrials/blup_oracle.hpp"
#include "mettrials/dataset.hpp"
#include "mettrials/exact_designs.hpp"

using namespace mettrials;

namespace {

AdjustedCovariance maize_adj(int J) {
    return adjusted_covariance(maize::genotype_covariance(maize::Structure::FactorAnalytic),
                               maize::variance_components(200.0), {5, 2, J, 2});
}

const Criterion& weighted() {
    static const Criterion crit = Criterion::weighted_a(SubRegionLoads(maize::areas()));
    return crit;
}

void BM_EnumerateSerial(benchmark::State& state) {
    const int J = static_cast<int>(state.range(0));
    const auto adj = maize_adj(J);
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_optimal_serial(adj, weighted(), J));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * composition_count(J, 5)));
}

void BM_EnumerateParallel(benchmark::State& state) {
    const int J = static_cast<int>(state.range(0));
    const auto adj = maize_adj(J);
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_optimal(adj, weighted(), J));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * composition_count(J, 5)));
}

struct SimFixture {
    GenotypeCovariance gc = maize::genotype_covariance(maize::Structure::FactorAnalytic);
    VarianceComponents vc = maize::variance_components(200.0);
    ModelMatrices mm = assemble(ExactDesign({2, 1, 1, 2, 1}), vc, gc, 2, 2);
};

void BM_SimulateSerial(benchmark::State& state) {
    const SimFixture f;
    const SimulationConfig cfg{static_cast<std::uint64_t>(state.range(0)), 1, {}};
    for (auto _ : state) benchmark::DoNotOptimize(simulate_empirical_mse_serial(f.mm, f.vc, f.gc, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateParallel(benchmark::State& state) {
    const SimFixture f;
    const SimulationConfig cfg{static_cast<std::uint64_t>(state.range(0)), 1, {}};
    for (auto _ : state) benchmark::DoNotOptimize(simulate_empirical_mse(f.mm, f.vc, f.gc, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Optimize(benchmark::State& state) {
    const auto adj = maize_adj(40);
    SolverConfig cfg;
    cfg.restarts = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(optimize(adj, weighted(), cfg));
}

}  // namespace

BENCHMARK(BM_EnumerateSerial)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateParallel)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateSerial)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Optimize)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
