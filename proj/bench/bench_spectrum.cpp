// Parallel against serial resolvent evaluation on a lasing operating point.

#include <benchmark/benchmark.h>

#include "srlaser/cumulant.hpp"
#include "srlaser/spectrum.hpp"

namespace {

struct Fixture {
    srl::RegressionSystem sys;
    Fixture() {
        srl::ParamInput in;
        in.N = 100000;
        in.p_d = 0.8;
        in.V = 1.0;
        in.bad_cavity_ratio = 10.0;
        in.gamma_plus = 1.0;
        in.gamma_minus = 1e-4;
        in.gamma_z = 1e-3;
        const srl::SystemParams p = srl::from_input(in);
        sys = srl::regression_system(p, srl::cumulant_steady_state(p).state);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_spectrum_serial(benchmark::State& state) {
    const auto grid = srl::uniform_grid(0.5, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(srl::steady_state_spectrum_serial(fixture().sys, grid));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_spectrum_parallel(benchmark::State& state) {
    const auto grid = srl::uniform_grid(0.5, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(srl::steady_state_spectrum(fixture().sys, grid));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_spectrum_serial)->Arg(2001)->Arg(100001);
BENCHMARK(BM_spectrum_parallel)->Arg(2001)->Arg(100001);

} // namespace

BENCHMARK_MAIN();
