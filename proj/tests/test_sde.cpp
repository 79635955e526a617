#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "thg/models.hpp"
#include "thg/moments.hpp"
#include "thg/sde.hpp"

using thg::Complex;
using thg::IntegrationConfig;
using thg::Scheme;

namespace {

// One-mode toy models exercising the generic engine.
struct ToyDecay {
    static constexpr int n_modes = 1;
    static constexpr int n_vars = 2;
    static constexpr int n_channels = 0;
    double gamma = 1.0;
    void drift(const Complex* s, Complex* f) const {
        f[0] = -gamma * s[0];
        f[1] = -gamma * s[1];
    }
    void add_noise(const Complex*, const double*, Complex*) const {}
};

struct ToyWiener {
    static constexpr int n_modes = 1;
    static constexpr int n_vars = 2;
    static constexpr int n_channels = 1;
    void drift(const Complex*, Complex* f) const { f[0] = f[1] = Complex{0.0, 0.0}; }
    void add_noise(const Complex*, const double* dw, Complex* out) const {
        out[0] += dw[0];
    }
};

struct ToyGeometric {  // d alpha = sigma alpha dW (Ito)
    static constexpr int n_modes = 1;
    static constexpr int n_vars = 2;
    static constexpr int n_channels = 1;
    double sigma = 0.5;
    void drift(const Complex*, Complex* f) const { f[0] = f[1] = Complex{0.0, 0.0}; }
    void add_noise(const Complex* s, const double* dw, Complex* out) const {
        out[0] += sigma * s[0] * dw[0];
    }
};

struct ToyBlowup {  // d alpha = alpha^3 dt, finite-time escape
    static constexpr int n_modes = 1;
    static constexpr int n_vars = 2;
    static constexpr int n_channels = 0;
    void drift(const Complex* s, Complex* f) const {
        f[0] = s[0] * s[0] * s[0];
        f[1] = Complex{0.0, 0.0};
    }
    void add_noise(const Complex*, const double*, Complex*) const {}
};

bool series_equal(const thg::MomentTimeSeries& a, const thg::MomentTimeSeries& b) {
    if (a.times != b.times || a.n_rejected != b.n_rejected) return false;
    for (std::size_t k = 0; k < a.moments.size(); ++k) {
        const auto& ma = a.moments[k];
        const auto& mb = b.moments[k];
        if (ma.n_bins() != mb.n_bins()) return false;
        for (int bi = 0; bi < ma.n_bins(); ++bi) {
            const auto& sa = ma.bin(bi);
            const auto& sb = mb.bin(bi);
            if (sa.count != sb.count || sa.sum_q != sb.sum_q || sa.sum_qq != sb.sum_qq ||
                sa.sum_n != sb.sum_n)
                return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("single step: zero drift and noise leaves the state unchanged") {
    ToyWiener m;
    thg::SystemState st;
    st.modes = {thg::ModeAmplitude{{1.25, -0.5}, {0.75, 0.25}}};
    st.time = 0.0;
    const double dw[1] = {0.0};
    const auto out = thg::step(m, st, 0.01, std::span<const double>(dw, 1));
    CHECK(out.modes[0].alpha == st.modes[0].alpha);
    CHECK(out.modes[0].alpha_plus == st.modes[0].alpha_plus);
    CHECK(out.time == doctest::Approx(0.01));
}

TEST_CASE("single step rejects a wrong increment count") {
    ToyWiener m;
    thg::SystemState st;
    st.modes = {thg::ModeAmplitude{}};
    const double dw[2] = {0.0, 0.0};
    CHECK_THROWS_AS((void)thg::step(m, st, 0.01, std::span<const double>(dw, 2)),
                    thg::Error);
}

TEST_CASE("exponential decay oracle") {
    ToyDecay m;
    thg::SystemState st;
    st.modes = {thg::ModeAmplitude::coherent({1.0, 0.0})};
    const double dt = 1e-3;
    for (int k = 0; k < 1000; ++k)
        st = thg::step(m, st, dt, std::span<const double>());
    CHECK(std::abs(st.modes[0].alpha.real() - std::exp(-1.0)) < 1e-3);

    // Halving dt roughly halves the weak (here deterministic) error.
    auto terminal_error = [&](double h) {
        thg::SystemState s2;
        s2.modes = {thg::ModeAmplitude::coherent({1.0, 0.0})};
        const int n = static_cast<int>(std::llround(1.0 / h));
        for (int k = 0; k < n; ++k) s2 = thg::step(m, s2, h, std::span<const double>());
        return std::abs(s2.modes[0].alpha.real() - std::exp(-1.0));
    };
    const double e1 = terminal_error(1e-3);
    const double e2 = terminal_error(5e-4);
    CHECK(e1 / e2 > 1.8);
    CHECK(e1 / e2 < 2.2);
}

TEST_CASE("semi-implicit midpoint integrates decay more accurately") {
    ToyDecay m;
    auto terminal = [&](Scheme scheme) {
        thg::SystemState s;
        s.modes = {thg::ModeAmplitude::coherent({1.0, 0.0})};
        for (int k = 0; k < 100; ++k)
            s = thg::step(m, s, 1e-2, std::span<const double>(), scheme);
        return s.modes[0].alpha.real();
    };
    const double euler_err = std::abs(terminal(Scheme::euler_maruyama) - std::exp(-1.0));
    const double mid_err = std::abs(terminal(Scheme::semi_implicit_midpoint) - std::exp(-1.0));
    CHECK(mid_err < 0.1 * euler_err);
}

TEST_CASE("pure noise channel: variance grows linearly in time") {
    ToyWiener m;
    const std::vector<Complex> init{{0.0, 0.0}, {0.0, 0.0}};
    IntegrationConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_max = 1.0;
    cfg.sample_stride = 25;
    cfg.n_traj = 20000;
    cfg.seed = 5;
    const auto series = thg::run_ensemble(m, init, cfg, 2);
    for (std::size_t k = 1; k < series.times.size(); ++k) {
        const double t = series.times[k];
        auto [v, err] = thg::binned_estimate(series.moments[k], [](const thg::MomentView& v) {
            return v.operator_variance(0, 0.0) - 1.0;
        });
        CHECK(std::abs(v - t) < 5.0 * err);
    }
}

TEST_CASE("Ito placement: geometric multiplicative noise second moment") {
    ToyGeometric m;
    const std::vector<Complex> init{{1.0, 0.0}, {0.0, 0.0}};
    IntegrationConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 1.0;
    cfg.sample_stride = 1000;
    cfg.n_traj = 40000;
    cfg.seed = 11;
    const auto series = thg::run_ensemble(m, init, cfg, 2);
    // Ito: E[alpha^2](t) = exp(sigma^2 t); Stratonovich would give exp(2 sigma^2 t).
    const double expect = std::exp(0.25);
    const auto view = series.moments.back().total();
    const double second = view.raw_second(0, 0);  // X = alpha here
    CHECK(std::abs(second - expect) < 0.05);
    CHECK(std::abs(second - std::exp(0.5)) > 0.2);

    // Mean stays 1 (martingale).
    CHECK(std::abs(view.mean_quadrature(0, thg::Quad::X) - 1.0) < 0.05);
}

TEST_CASE("determinism: identical results for any worker count") {
    thg::CascadeModel model(thg::CascadeParams::travelling(1e-2, 1.5e-2));
    const auto init = thg::coherent_initial_cascade({30.0, 0.0});
    IntegrationConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 0.05;
    cfg.sample_stride = 10;
    cfg.n_traj = 600;
    cfg.seed = 99;
    const auto s1 = thg::run_ensemble(model, std::span<const Complex>(init), cfg, 1);
    const auto s2 = thg::run_ensemble(model, std::span<const Complex>(init), cfg, 2);
    const auto s8 = thg::run_ensemble(model, std::span<const Complex>(init), cfg, 8);
    CHECK(series_equal(s1, s2));
    CHECK(series_equal(s1, s8));
}

TEST_CASE("divergent trajectories are dropped, counted and flagged") {
    ToyBlowup m;
    const std::vector<Complex> init{{2.0, 0.0}, {0.0, 0.0}};
    IntegrationConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 1.0;
    cfg.sample_stride = 100;
    cfg.n_traj = 50;
    cfg.seed = 1;
    cfg.divergence_radius = 10.0;
    const auto series = thg::run_ensemble(m, init, cfg, 2);
    CHECK(series.n_rejected == 50);
    CHECK(!series.reliable());
    CHECK(series.first_divergence_time > 0.0);
    CHECK(series.first_divergence_time < 0.2);
    CHECK(series.moments.back().sample_count() == 0);
}

TEST_CASE("free field: constant moments and exact vacuum-level variances") {
    thg::DirectModel model(thg::DirectParams::travelling(0.0));
    const auto init = thg::coherent_initial_direct({100.0, 0.0});
    IntegrationConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_max = 1.0;
    cfg.sample_stride = 20;
    cfg.n_traj = 100;
    cfg.seed = 2;
    const auto series = thg::run_ensemble(model, std::span<const Complex>(init), cfg, 1);
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const auto v = series.moments[k].total();
        CHECK(v.mean_intensity(0) == 10000.0);
        CHECK(v.operator_variance(0, 0.0) == 1.0);
        CHECK(v.operator_variance(1, M_PI_2) == 1.0);
    }
}

TEST_CASE("config validation rejects inconsistent grids") {
    IntegrationConfig cfg;
    cfg.dt = 3e-4;
    cfg.t_max = 1.0;  // not a whole number of steps
    CHECK_THROWS_AS(cfg.validate(), thg::ConfigError);

    cfg.dt = 1e-3;
    cfg.t_max = 1.0;
    cfg.sample_stride = 7;  // 1000 % 7 != 0
    CHECK_THROWS_AS(cfg.validate(), thg::ConfigError);

    cfg.sample_stride = 8;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("trajectory streams can be replayed in isolation") {
    // The noise consumed by trajectory t depends only on (seed, t): running a
    // bigger ensemble does not change trajectory t's contribution.
    thg::DirectModel model(thg::DirectParams::travelling(1e-3));
    const auto init = thg::coherent_initial_direct({50.0, 0.0});
    IntegrationConfig small;
    small.dt = 1e-2;
    small.t_max = 0.1;
    small.n_traj = 1;
    small.seed = 31;
    small.n_bins = 1;
    IntegrationConfig big = small;
    big.n_traj = 3;
    big.chunk_size = 1;
    big.n_bins = 3;  // bin b holds exactly chunk b = trajectory b
    const auto s1 = thg::run_ensemble(model, std::span<const Complex>(init), small, 1);
    const auto s3 = thg::run_ensemble(model, std::span<const Complex>(init), big, 1);
    // First chunk of the big run holds exactly trajectory 0 = the small run.
    CHECK(s1.moments.back().bin(0).sum_q[0] == s3.moments.back().bin(0).sum_q[0]);
}
