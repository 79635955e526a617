#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "thg/errors.hpp"
#include "thg/models.hpp"
#include "thg/rng.hpp"

using thg::CascadeModel;
using thg::CascadeParams;
using thg::Complex;
using thg::DirectModel;
using thg::DirectParams;
using thg::ModelKind;

namespace {

std::vector<Complex> random_state(thg::GaussianStream& g, int n_vars, double scale) {
    std::vector<Complex> s(n_vars);
    for (auto& z : s) z = Complex{scale * g.next(), scale * g.next()};
    return s;
}

// B B^T for a row-major n_vars x n_channels matrix.
std::vector<Complex> bbt(const std::vector<Complex>& b, int n_vars, int n_ch) {
    std::vector<Complex> d(n_vars * n_vars, Complex{0.0, 0.0});
    for (int i = 0; i < n_vars; ++i)
        for (int j = 0; j < n_vars; ++j)
            for (int c = 0; c < n_ch; ++c) d[i * n_vars + j] += b[i * n_ch + c] * b[j * n_ch + c];
    return d;
}

template <class M>
Complex charge_derivative(const M& m, const Complex* s, ModelKind kind) {
    Complex f[M::n_vars];
    m.drift(s, f);
    const double w2 = kind == ModelKind::direct ? 3.0 : 2.0;
    Complex d = f[0] * s[1] + s[0] * f[1] + w2 * (f[2] * s[3] + s[2] * f[3]);
    if constexpr (M::n_modes == 3) d += 3.0 * (f[4] * s[5] + s[4] * f[5]);
    return d;
}

}  // namespace

TEST_CASE("direct drift trivial reads") {
    DirectModel free_field(DirectParams::travelling(0.0));
    const auto s = thg::coherent_initial_direct({3.0, -1.0}, {0.5, 0.25});
    Complex f[4];
    free_field.drift(s.data(), f);
    for (const auto& z : f) CHECK(std::abs(z) == 0.0);

    const double kappa = 1e-3, x = 7.0;
    DirectModel m(DirectParams::travelling(kappa));
    const Complex s2[4] = {{x, 0.0}, {x, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    m.drift(s2, f);
    CHECK(std::abs(f[0]) == 0.0);
    CHECK(std::abs(f[1]) == 0.0);
    CHECK(f[2].real() == doctest::Approx(-kappa / 3.0 * x * x * x).epsilon(1e-15));
    CHECK(f[3].real() == doctest::Approx(-kappa / 3.0 * x * x * x).epsilon(1e-15));
}

TEST_CASE("direct classical steady state zeroes the drift") {
    const double kappa = 1e-3, ga = 1.0, gb = 2.0, x = 30.0;
    const double eps = ga * x + kappa * kappa / (3.0 * gb) * std::pow(x, 5);
    DirectModel m(DirectParams::intracavity(kappa, ga, gb, {eps, 0.0}));
    const double beta = -kappa * x * x * x / (3.0 * gb);
    const auto s = thg::coherent_initial_direct({x, 0.0}, {beta, 0.0});
    Complex f[4];
    m.drift(s.data(), f);
    for (const auto& z : f) CHECK(std::abs(z) < 1e-10 * eps);
}

TEST_CASE("direct noise vanishes without the harmonic and is diagonal") {
    DirectModel m(DirectParams::travelling(2e-3));
    const auto s0 = thg::coherent_initial_direct({5.0, 1.0});  // beta = 0
    std::vector<Complex> b(4 * 2);
    m.noise_matrix(s0.data(), b.data());
    for (const auto& z : b) CHECK(std::abs(z) == 0.0);

    // alpha_plus * beta real negative: principal-branch root is purely imaginary.
    const Complex s1[4] = {{2.0, 0.0}, {2.0, 0.0}, {-3.0, 0.0}, {-3.0, 0.0}};
    m.noise_matrix(s1, b.data());
    CHECK(b[0 * 2 + 0].real() == 0.0);
    CHECK(b[0 * 2 + 0].imag() > 0.0);

    // B B^T reproduces the analytic diffusion for random states.
    thg::GaussianStream g(3, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_state(g, 4, 1.5);
        m.noise_matrix(s.data(), b.data());
        const auto d = bbt(b, 4, 2);
        const auto d_ref = thg::diffusion_direct(m.p, s);
        for (int i = 0; i < 16; ++i) CHECK(std::abs(d[i] - d_ref[i]) < 1e-12);
    }
}

TEST_CASE("cascade drift trivial reads") {
    CascadeModel m(CascadeParams::travelling(1e-2, 1.5e-2));
    std::vector<Complex> s(6, Complex{0.0, 0.0});
    Complex f[6];
    m.drift(s.data(), f);
    for (const auto& z : f) CHECK(std::abs(z) == 0.0);

    const double x = 9.0;
    const Complex s2[6] = {{x, 0.0}, {x, 0.0}, {}, {}, {}, {}};
    m.drift(s2, f);
    CHECK(std::abs(f[0]) == 0.0);
    CHECK(f[2].real() == doctest::Approx(1e-2 * x * x).epsilon(1e-15));
}

TEST_CASE("cascade noise factorization satisfies B B^T = D") {
    CascadeModel m(CascadeParams::travelling(1e-2, 1.5e-2));
    thg::GaussianStream g(17, 0);
    std::vector<Complex> b(6 * 6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_state(g, 6, 1.2);
        m.noise_matrix(s.data(), b.data());
        const auto d = bbt(b, 6, 6);
        const auto d_ref = thg::diffusion_cascade(m.p, s);
        for (int i = 0; i < 36; ++i) CHECK(std::abs(d[i] - d_ref[i]) < 1e-12);
    }
}

TEST_CASE("cascade noise with no third harmonic uses only the first two channels") {
    CascadeModel m(CascadeParams::travelling(1e-2, 1.5e-2));
    const Complex s[6] = {{1.0, 0.5}, {1.0, -0.5}, {2.0, 0.0}, {2.0, 0.0}, {}, {}};
    std::vector<Complex> b(36);
    m.noise_matrix(s, b.data());
    for (int i = 0; i < 6; ++i)
        for (int c = 2; c < 6; ++c) CHECK(std::abs(b[i * 6 + c]) == 0.0);
    CHECK(std::abs(b[0 * 6 + 0]) > 0.0);
    CHECK(std::abs(b[1 * 6 + 1]) > 0.0);
}

TEST_CASE("conserved charge values") {
    const auto sd = thg::coherent_initial_direct({100.0, 0.0});
    CHECK(thg::conserved_charge(sd, ModelKind::direct).real() == 10000.0);
    const auto sc = thg::coherent_initial_cascade({100.0, 0.0});
    CHECK(thg::conserved_charge(sc, ModelKind::cascade).real() == 10000.0);
    const std::vector<Complex> vac(6, Complex{0.0, 0.0});
    CHECK(std::abs(thg::conserved_charge(vac, ModelKind::cascade)) == 0.0);
}

TEST_CASE("lossless drift conserves the weighted charge for random states") {
    DirectModel md(DirectParams::travelling(2e-3));
    CascadeModel mc(CascadeParams::travelling(1e-2, 1.7e-2));
    thg::GaussianStream g(23, 2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto sd = random_state(g, 4, 2.0);
        const auto sc = random_state(g, 6, 2.0);
        CHECK(std::abs(charge_derivative(md, sd.data(), ModelKind::direct)) < 1e-10);
        CHECK(std::abs(charge_derivative(mc, sc.data(), ModelKind::cascade)) < 1e-10);
    }
}

TEST_CASE("classical rhs preserves the conjugate manifold") {
    thg::SystemState st;
    st.modes = {thg::ModeAmplitude::coherent({1.0, 2.0}),
                thg::ModeAmplitude::coherent({-0.5, 0.75})};
    const auto d = thg::classical_rhs(st, DirectParams::travelling(1e-3));
    for (const auto& m : d.modes)
        CHECK(std::abs(m.alpha_plus - std::conj(m.alpha)) == 0.0);

    // The manifold derivative matches the doubled drift restricted to it.
    DirectModel full(DirectParams::travelling(1e-3));
    const Complex s[4] = {st.modes[0].alpha, std::conj(st.modes[0].alpha),
                          st.modes[1].alpha, std::conj(st.modes[1].alpha)};
    Complex f[4];
    full.drift(s, f);
    CHECK(std::abs(d.modes[0].alpha - f[0]) < 1e-14);
    CHECK(std::abs(d.modes[1].alpha - f[2]) < 1e-14);
    CHECK(std::abs(std::conj(d.modes[0].alpha) - f[1]) < 1e-14);
}

TEST_CASE("classical integration conserves the charge to integrator tolerance") {
    thg::ClassicalDirect m(DirectParams::travelling(1e-3));
    const std::vector<Complex> init{{100.0, 0.0}, {0.0, 0.0}};
    const auto traj = thg::classical_trajectory(m, init, 1e-3, 2000, 100);
    const double c0 = 10000.0;
    for (const auto& a : traj.amplitudes) {
        const double c = std::norm(a[0]) + 3.0 * std::norm(a[1]);
        CHECK(std::abs(c - c0) < 1e-6 * c0);
    }
}

TEST_CASE("travelling variant rejects losses and pump") {
    DirectParams p;
    p.kappa = 1e-3;
    p.gamma_a = 0.5;
    p.variant = thg::Variant::travelling_wave;
    CHECK_THROWS_AS(p.validate(), thg::ConfigError);

    CascadeParams c;
    c.kappa1 = 1e-2;
    c.kappa2 = 1e-2;
    c.epsilon = {1.0, 0.0};
    c.variant = thg::Variant::travelling_wave;
    CHECK_THROWS_AS(c.validate(), thg::ConfigError);
}

TEST_CASE("negative couplings are rejected") {
    DirectParams p;
    p.kappa = -1.0;
    CHECK_THROWS_AS(p.validate(), thg::ConfigError);
}
