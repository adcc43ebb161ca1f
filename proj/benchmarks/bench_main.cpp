#include <benchmark/benchmark.h>

#include <vector>

#include "tricorr/analysis_cavity.hpp"
#include "tricorr/dsp.hpp"
#include "tricorr/fit.hpp"
#include "tricorr/opo_model.hpp"
#include "tricorr/rng.hpp"

using namespace tricorr;

namespace {

OpoParams fitted_params() {
    OpoParams p;
    p.sigma = 1.34;
    p.delta0 = 0.2;
    p.delta = 0.26;
    p.excess_pump_phase_noise = 15.0;
    p.eta_twin = 0.80;
    p.eta_pump = 0.45;
    return p;
}

void BM_SpectralCovariance(benchmark::State& state) {
    const OpoParams p = fitted_params();
    for (auto _ : state)
        benchmark::DoNotOptimize(spectral_covariance(p, 27e6));
}
BENCHMARK(BM_SpectralCovariance);

void BM_ScanCurve(benchmark::State& state) {
    const SpectralCovariance cov = spectral_covariance(fitted_params(), 27e6);
    const TwinBeamBlocks beams = twin_blocks_from(cov);
    std::vector<double> grid;
    for (double d = -3.0; d <= 3.0; d += 6.0 / (state.range(0) - 1)) grid.push_back(d);
    for (auto _ : state)
        benchmark::DoNotOptimize(scan_curve(beams, grid, CavityParams{}));
}
BENCHMARK(BM_ScanCurve)->Arg(121)->Arg(1201);

void BM_SimulateTrajectories(benchmark::State& state) {
    const OpoParams p = fitted_params();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            simulate_trajectories(p, 0.01, static_cast<double>(state.range(0)), 4, 1));
    state.SetItemsProcessed(state.iterations() * 4 * state.range(0) * 100);
}
BENCHMARK(BM_SimulateTrajectories)->Arg(50)->Arg(200);

void BM_Demodulate(benchmark::State& state) {
    Rng rng(1);
    std::vector<double> rf(static_cast<std::size_t>(state.range(0)));
    for (auto& x : rf) x = rng.gaussian();
    for (auto _ : state)
        benchmark::DoNotOptimize(demodulate(rf, 120e6, 27e6, 0.0, 600e3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Demodulate)->Arg(1 << 18)->Arg(1 << 20);

void BM_SynthesizeBaseband(benchmark::State& state) {
    Eigen::Matrix3d target = Eigen::Matrix3d::Identity();
    target(1, 2) = target(2, 1) = 0.47;
    for (auto _ : state)
        benchmark::DoNotOptimize(synthesize_baseband(
            target, static_cast<std::size_t>(state.range(0)), 600e3, 7));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SynthesizeBaseband)->Arg(10000)->Arg(100000);

void BM_PredictSigmaScan(benchmark::State& state) {
    const OpoParams p = fitted_params();
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(1.05 + 0.07 * i);
    for (auto _ : state)
        benchmark::DoNotOptimize(predict_sigma_scan(p, grid, 27e6));
}
BENCHMARK(BM_PredictSigmaScan);

}  // namespace

BENCHMARK_MAIN();
