// Serial reference vs OpenMP kernels.
//
//   ./build/bench/bench_mc --benchmark_min_time=2

#include <benchmark/benchmark.h>

#include <omp.h>

#include "stcorr/correlation.hpp"
#include "stcorr/coverage.hpp"
#include "stcorr/mc_engine.hpp"

namespace {

using namespace stcorr;

const NetworkParams kCoverage{1.0, 4.0, 0.0, FadingModel::rayleigh()};
const NetworkParams kCorr{1.0, 4.0, 1.0, FadingModel::rayleigh()};

void BM_JcpMc(benchmark::State& state)
{
    McOptions opts;
    opts.serial = state.range(0) == 0;
    const long n = state.range(1);
    for (auto _ : state) {
        auto e = estimate_jcp_all(kCoverage, 1.0, 1.0, n, 7, opts);
        benchmark::DoNotOptimize(e.conventional.mean);
    }
    state.SetItemsProcessed(state.iterations() * n);
    state.SetLabel(opts.serial ? "serial" : "omp x" + std::to_string(omp_get_max_threads()));
}
BENCHMARK(BM_JcpMc)->Args({0, 20000})->Args({1, 20000})->Unit(benchmark::kMillisecond);

void BM_CorrMc(benchmark::State& state)
{
    McOptions opts;
    opts.serial = state.range(0) == 0;
    const long n = state.range(1);
    for (auto _ : state) {
        auto e = estimate_corr(kCorr, 1.0, n, 7, opts);
        benchmark::DoNotOptimize(e.mean);
    }
    state.SetItemsProcessed(state.iterations() * n);
    state.SetLabel(opts.serial ? "serial" : "omp x" + std::to_string(omp_get_max_threads()));
}
BENCHMARK(BM_CorrMc)->Args({0, 20000})->Args({1, 20000})->Unit(benchmark::kMillisecond);

// Panel nodes evaluated across threads vs one thread.
void BM_CorrAnalytic(benchmark::State& state)
{
    const int threads = static_cast<int>(state.range(0));
    const int saved = omp_get_max_threads();
    omp_set_num_threads(threads > 0 ? threads : saved);
    for (auto _ : state) {
        auto r = corr_coefficient(kCorr, 1.0, QuadratureSpec{});
        benchmark::DoNotOptimize(r.coefficient);
    }
    omp_set_num_threads(saved);
    state.SetLabel(threads == 1 ? "1 thread" : "omp default");
}
BENCHMARK(BM_CorrAnalytic)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->Iterations(2);

void BM_JcpAnalytic(benchmark::State& state)
{
    const int threads = static_cast<int>(state.range(0));
    const int saved = omp_get_max_threads();
    omp_set_num_threads(threads > 0 ? threads : saved);
    CoverageQuery q;
    q.v = 1.0;
    for (auto _ : state) {
        auto r = jcp_total(q);
        benchmark::DoNotOptimize(r.joint);
    }
    omp_set_num_threads(saved);
    state.SetLabel(threads == 1 ? "1 thread" : "omp default");
}
BENCHMARK(BM_JcpAnalytic)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();
