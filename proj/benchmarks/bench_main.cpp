#include <benchmark/benchmark.h>

#include "thg/models.hpp"
#include "thg/moments.hpp"
#include "thg/rng.hpp"
#include "thg/sde.hpp"

namespace {

using thg::Complex;

void BM_GaussianStream(benchmark::State& state) {
    thg::GaussianStream g(42, 7);
    double dw[6];
    for (auto _ : state) {
        g.fill(std::span<double>(dw, 6), 0.03);
        benchmark::DoNotOptimize(dw[5]);
    }
    state.SetItemsProcessed(state.iterations() * 6);
}
BENCHMARK(BM_GaussianStream);

void BM_DirectStep(benchmark::State& state) {
    thg::DirectModel model(thg::DirectParams::travelling(1e-3));
    std::array<Complex, 4> s = thg::coherent_initial_direct({100.0, 0.0}, {-10.0, 0.0});
    thg::GaussianStream g(1, 0);
    double dw[2];
    for (auto _ : state) {
        g.fill(std::span<double>(dw, 2), 0.1);
        thg::detail::step_in_place(model, s, 1e-3, dw, thg::Scheme::euler_maruyama);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_DirectStep);

void BM_CascadeStep(benchmark::State& state) {
    thg::CascadeModel model(thg::CascadeParams::travelling(1e-2, 1.5e-2));
    std::array<Complex, 6> s =
        thg::coherent_initial_cascade({100.0, 0.0}, {5.0, 0.0}, {2.0, 0.0});
    thg::GaussianStream g(1, 0);
    double dw[6];
    for (auto _ : state) {
        g.fill(std::span<double>(dw, 6), 0.03);
        thg::detail::step_in_place(model, s, 1e-3, dw, thg::Scheme::euler_maruyama);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_CascadeStep);

void BM_MomentIngest(benchmark::State& state) {
    thg::MomentSums sums(3);
    const auto s = thg::coherent_initial_cascade({3.0, 1.0}, {0.5, -0.25}, {0.1, 0.9});
    for (auto _ : state) {
        sums.add_state(s.data());
        benchmark::DoNotOptimize(sums.count);
    }
}
BENCHMARK(BM_MomentIngest);

void BM_SmallEnsemble(benchmark::State& state) {
    thg::CascadeModel model(thg::CascadeParams::travelling(1e-2, 1.5e-2));
    const auto init = thg::coherent_initial_cascade({100.0, 0.0});
    thg::IntegrationConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 0.1;
    cfg.sample_stride = 10;
    cfg.n_traj = 64;
    cfg.seed = 9;
    for (auto _ : state) {
        auto series = thg::run_ensemble(model, std::span<const Complex>(init), cfg, 1);
        benchmark::DoNotOptimize(series.moments.back().sample_count());
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_traj * cfg.n_steps());
}
BENCHMARK(BM_SmallEnsemble);

}  // namespace

BENCHMARK_MAIN();
