// Microbenchmarks for the hot kernels: CSR matvec, residual assembly, the
// damped in-place sweep, and one recorded solver iteration.

#include "rich/async_runtime.hpp"
#include "rich/rng.hpp"
#include "rich/splitting.hpp"
#include "rich/sync_solvers.hpp"

#include <benchmark/benchmark.h>

namespace {

rich::SplittingSystem make_system(std::size_t m) {
    return rich::jacobi_split(rich::laplacian_2d(m), rich::random_rhs(m * m, 1));
}

void bm_matvec(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const rich::SplittingSystem sys = make_system(m);
    rich::RealVector x = rich::random_rhs(sys.n, 2), y;
    for (auto _ : state) {
        rich::matvec(sys.a, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(sys.a.nnz()));
}
BENCHMARK(bm_matvec)->Arg(50)->Arg(100)->Arg(300);

void bm_residual(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const rich::SplittingSystem sys = make_system(m);
    rich::RealVector x = rich::random_rhs(sys.n, 2), r;
    for (auto _ : state) {
        rich::residual(sys, x, r);
        benchmark::DoNotOptimize(r.data());
    }
}
BENCHMARK(bm_residual)->Arg(100)->Arg(300);

void bm_damped_sweep(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const rich::SplittingSystem sys = make_system(m);
    for (auto _ : state) {
        const auto trace = rich::damped_sweeps(sys, rich::RealVector(sys.n, 0.0), 1.0, 1);
        benchmark::DoNotOptimize(trace.final_x.data());
    }
}
BENCHMARK(bm_damped_sweep)->Arg(100)->Arg(300);

void bm_second_order_step(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const rich::SplittingSystem sys = make_system(m);
    const rich::IterParams params{1.0, 0.5, {}};
    for (auto _ : state) {
        const auto trace = rich::second_order(sys, rich::RealVector(sys.n, 0.0), params, 2);
        benchmark::DoNotOptimize(trace.final_x.data());
    }
}
BENCHMARK(bm_second_order_step)->Arg(100)->Arg(300);

void bm_async_run(benchmark::State& state) {
    const rich::SplittingSystem sys = make_system(100);
    rich::AsyncConfig config;
    config.num_threads = static_cast<std::size_t>(state.range(0));
    config.target_avg_updates = 100;
    config.params = rich::IterParams{1.0, 0.0, {}};
    for (auto _ : state) {
        const auto stats = rich::run_async_first_order(sys, config);
        benchmark::DoNotOptimize(stats.rel_resid);
    }
}
BENCHMARK(bm_async_run)->Arg(1)->Arg(2)->Arg(4);

} // namespace

BENCHMARK_MAIN();
