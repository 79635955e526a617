#include "thg/models.hpp"

#include <cmath>

#include "thg/errors.hpp"

namespace thg {

namespace {

void require_finite_nonneg(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
        throw ConfigError("must be finite and >= 0", -1, name);
}

}  // namespace

void DirectParams::validate() const {
    require_finite_nonneg(kappa, "kappa");
    require_finite_nonneg(gamma_a, "gamma_a");
    require_finite_nonneg(gamma_b, "gamma_b");
    if (!std::isfinite(epsilon.real()) || !std::isfinite(epsilon.imag()))
        throw ConfigError("must be finite", -1, "epsilon");
    if (variant == Variant::travelling_wave &&
        (gamma_a != 0.0 || gamma_b != 0.0 || epsilon != Complex{0.0, 0.0}))
        throw ConfigError("travelling-wave variant requires zero losses and pump");
}

DirectParams DirectParams::travelling(double kappa) {
    DirectParams p;
    p.kappa = kappa;
    p.variant = Variant::travelling_wave;
    p.validate();
    return p;
}

DirectParams DirectParams::intracavity(double kappa, double gamma_a, double gamma_b,
                                       Complex epsilon) {
    DirectParams p;
    p.kappa = kappa;
    p.gamma_a = gamma_a;
    p.gamma_b = gamma_b;
    p.epsilon = epsilon;
    p.variant = Variant::intracavity;
    p.validate();
    return p;
}

void CascadeParams::validate() const {
    require_finite_nonneg(kappa1, "kappa1");
    require_finite_nonneg(kappa2, "kappa2");
    require_finite_nonneg(gamma0, "gamma0");
    require_finite_nonneg(gamma1, "gamma1");
    require_finite_nonneg(gamma2, "gamma2");
    if (!std::isfinite(epsilon.real()) || !std::isfinite(epsilon.imag()))
        throw ConfigError("must be finite", -1, "epsilon");
    if (variant == Variant::travelling_wave &&
        (gamma0 != 0.0 || gamma1 != 0.0 || gamma2 != 0.0 || epsilon != Complex{0.0, 0.0}))
        throw ConfigError("travelling-wave variant requires zero losses and pump");
}

CascadeParams CascadeParams::travelling(double kappa1, double kappa2) {
    CascadeParams p;
    p.kappa1 = kappa1;
    p.kappa2 = kappa2;
    p.variant = Variant::travelling_wave;
    p.validate();
    return p;
}

CascadeParams CascadeParams::intracavity(double kappa1, double kappa2, double gamma0,
                                         double gamma1, double gamma2, Complex epsilon) {
    CascadeParams p;
    p.kappa1 = kappa1;
    p.kappa2 = kappa2;
    p.gamma0 = gamma0;
    p.gamma1 = gamma1;
    p.gamma2 = gamma2;
    p.epsilon = epsilon;
    p.variant = Variant::intracavity;
    p.validate();
    return p;
}

std::vector<Complex> diffusion_direct(const DirectParams& p, std::span<const Complex> s) {
    std::vector<Complex> d(16, Complex{0.0, 0.0});
    d[0 * 4 + 0] = 2.0 * p.kappa * s[1] * s[2];
    d[1 * 4 + 1] = 2.0 * p.kappa * s[0] * s[3];
    return d;
}

std::vector<Complex> diffusion_cascade(const CascadeParams& p, std::span<const Complex> s) {
    std::vector<Complex> d(36, Complex{0.0, 0.0});
    d[0 * 6 + 0] = -2.0 * p.kappa1 * s[2];
    d[1 * 6 + 1] = -2.0 * p.kappa1 * s[3];
    d[0 * 6 + 2] = d[2 * 6 + 0] = -p.kappa2 * s[4];
    d[1 * 6 + 3] = d[3 * 6 + 1] = -p.kappa2 * s[5];
    return d;
}

Complex conserved_charge(std::span<const Complex> vars, ModelKind kind) {
    if (kind == ModelKind::direct)
        return vars[0] * vars[1] + 3.0 * vars[2] * vars[3];
    return vars[0] * vars[1] + 2.0 * vars[2] * vars[3] + 3.0 * vars[4] * vars[5];
}

std::array<Complex, 4> coherent_initial_direct(Complex alpha0, Complex beta0) {
    return {alpha0, std::conj(alpha0), beta0, std::conj(beta0)};
}

std::array<Complex, 6> coherent_initial_cascade(Complex a0, Complex a1, Complex a2) {
    return {a0, std::conj(a0), a1, std::conj(a1), a2, std::conj(a2)};
}

namespace {

template <class M>
SystemState classical_rhs_impl(const M& model, const SystemState& state) {
    const int n = M::n_modes;
    std::vector<Complex> a(n), f(n);
    for (int i = 0; i < n; ++i) a[i] = state.modes.at(i).alpha;
    model.rhs(a.data(), f.data());
    SystemState d;
    d.time = state.time;
    d.modes.resize(n);
    for (int i = 0; i < n; ++i) d.modes[i] = {f[i], std::conj(f[i])};
    return d;
}

}  // namespace

SystemState classical_rhs(const SystemState& state, const DirectParams& p) {
    return classical_rhs_impl(ClassicalDirect(p), state);
}

SystemState classical_rhs(const SystemState& state, const CascadeParams& p) {
    return classical_rhs_impl(ClassicalCascade(p), state);
}

}  // namespace thg
