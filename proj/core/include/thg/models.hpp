#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "thg/phase_space.hpp"

namespace thg {

enum class Variant { travelling_wave, intracavity };
enum class ModelKind { direct, cascade };

/// Parameters of direct (triply degenerate four-wave mixing) third harmonic
/// generation. The travelling-wave variant has no cavity: losses and pump are
/// forced to zero.
struct DirectParams {
    double kappa = 0.0;
    double gamma_a = 0.0;
    double gamma_b = 0.0;
    Complex epsilon{0.0, 0.0};
    Variant variant = Variant::travelling_wave;

    void validate() const;  // throws ConfigError on violations

    static DirectParams travelling(double kappa);
    static DirectParams intracavity(double kappa, double gamma_a, double gamma_b,
                                    Complex epsilon);
};

/// Parameters of the cascaded scheme (second harmonic generation followed by
/// sum-frequency generation in one medium).
struct CascadeParams {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    Complex epsilon{0.0, 0.0};
    Variant variant = Variant::travelling_wave;

    void validate() const;

    static CascadeParams travelling(double kappa1, double kappa2);
    static CascadeParams intracavity(double kappa1, double kappa2, double gamma0,
                                     double gamma1, double gamma2, Complex epsilon);
};

namespace detail {

// Principal branch complex square root, fast path for finite inputs.
inline Complex csqrt(Complex z) {
    const double x = z.real(), y = z.imag();
    const double r = std::sqrt(x * x + y * y);
    if (r == 0.0) return {0.0, 0.0};
    const double m = std::sqrt(0.5 * (r + std::abs(x)));
    if (x >= 0.0) return {m, y / (2.0 * m)};
    return {std::abs(y) / (2.0 * m), y >= 0.0 ? m : -m};
}

}  // namespace detail

/// Ito drift and noise of the truncated positive-P equations for direct THG.
/// Variable layout: (alpha, alpha_plus, beta, beta_plus).
struct DirectModel {
    static constexpr int n_modes = 2;
    static constexpr int n_vars = 4;
    static constexpr int n_channels = 2;

    DirectParams p;

    explicit DirectModel(DirectParams params) : p(params) { p.validate(); }

    void drift(const Complex* s, Complex* f) const {
        const Complex &a = s[0], &ap = s[1], &b = s[2], &bp = s[3];
        f[0] = p.epsilon - p.gamma_a * a + p.kappa * ap * ap * b;
        f[1] = std::conj(p.epsilon) - p.gamma_a * ap + p.kappa * a * a * bp;
        f[2] = -p.gamma_b * b - (p.kappa / 3.0) * a * a * a;
        f[3] = -p.gamma_b * bp - (p.kappa / 3.0) * ap * ap * ap;
    }

    /// out += B(s) * dw with B evaluated at the supplied (pre-step) state.
    /// Only the fundamental pair carries noise; the harmonic is noiseless.
    void add_noise(const Complex* s, const double* dw, Complex* out) const {
        const double k2 = 2.0 * p.kappa;
        out[0] += detail::csqrt(k2 * s[1] * s[2]) * dw[0];
        out[1] += detail::csqrt(k2 * s[0] * s[3]) * dw[1];
    }

    /// Full n_vars x n_channels noise matrix (row-major), for factorization
    /// checks; the integrator uses add_noise.
    void noise_matrix(const Complex* s, Complex* B) const {
        for (int i = 0; i < n_vars * n_channels; ++i) B[i] = Complex{0.0, 0.0};
        B[0 * n_channels + 0] = detail::csqrt(2.0 * p.kappa * s[1] * s[2]);
        B[1 * n_channels + 1] = detail::csqrt(2.0 * p.kappa * s[0] * s[3]);
    }
};

/// Exact positive-P equations for the cascaded scheme. Variable layout:
/// (alpha0, alpha0_plus, alpha1, alpha1_plus, alpha2, alpha2_plus); six real
/// noise channels.
struct CascadeModel {
    static constexpr int n_modes = 3;
    static constexpr int n_vars = 6;
    static constexpr int n_channels = 6;

    CascadeParams p;

    explicit CascadeModel(CascadeParams params) : p(params) { p.validate(); }

    void drift(const Complex* s, Complex* f) const {
        const Complex &a0 = s[0], &a0p = s[1], &a1 = s[2], &a1p = s[3], &a2 = s[4],
                      &a2p = s[5];
        f[0] = p.epsilon - p.gamma0 * a0 - 2.0 * p.kappa1 * a0p * a1 - p.kappa2 * a1p * a2;
        f[1] = std::conj(p.epsilon) - p.gamma0 * a0p - 2.0 * p.kappa1 * a0 * a1p -
               p.kappa2 * a1 * a2p;
        f[2] = -p.gamma1 * a1 + p.kappa1 * a0 * a0 - p.kappa2 * a0p * a2;
        f[3] = -p.gamma1 * a1p + p.kappa1 * a0p * a0p - p.kappa2 * a0 * a2p;
        f[4] = -p.gamma2 * a2 + p.kappa2 * a0 * a1;
        f[5] = -p.gamma2 * a2p + p.kappa2 * a0p * a1p;
    }

    void add_noise(const Complex* s, const double* dw, Complex* out) const {
        const Complex r0 = detail::csqrt(-2.0 * p.kappa1 * s[2]);
        const Complex r0p = detail::csqrt(-2.0 * p.kappa1 * s[3]);
        const Complex c = detail::csqrt(-0.5 * p.kappa2 * s[4]);
        const Complex cp = detail::csqrt(-0.5 * p.kappa2 * s[5]);
        const Complex ic{-c.imag(), c.real()};     // i*c
        const Complex icp{-cp.imag(), cp.real()};  // i*cp
        out[0] += r0 * dw[0] + c * dw[2] + ic * dw[4];
        out[1] += r0p * dw[1] + cp * dw[3] + icp * dw[5];
        out[2] += c * dw[2] - ic * dw[4];
        out[3] += cp * dw[3] - icp * dw[5];
    }

    void noise_matrix(const Complex* s, Complex* B) const {
        for (int i = 0; i < n_vars * n_channels; ++i) B[i] = Complex{0.0, 0.0};
        const Complex c = detail::csqrt(-0.5 * p.kappa2 * s[4]);
        const Complex cp = detail::csqrt(-0.5 * p.kappa2 * s[5]);
        const Complex i1{0.0, 1.0};
        B[0 * n_channels + 0] = detail::csqrt(-2.0 * p.kappa1 * s[2]);
        B[1 * n_channels + 1] = detail::csqrt(-2.0 * p.kappa1 * s[3]);
        B[0 * n_channels + 2] = c;
        B[0 * n_channels + 4] = i1 * c;
        B[1 * n_channels + 3] = cp;
        B[1 * n_channels + 5] = i1 * cp;
        B[2 * n_channels + 2] = c;
        B[2 * n_channels + 4] = -i1 * c;
        B[3 * n_channels + 3] = cp;
        B[3 * n_channels + 5] = -i1 * cp;
    }
};

/// Analytic diffusion matrix D(s) = B B^T of a model at the given state,
/// n_vars x n_vars row-major.
std::vector<Complex> diffusion_direct(const DirectParams& p, std::span<const Complex> s);
std::vector<Complex> diffusion_cascade(const CascadeParams& p, std::span<const Complex> s);

/// Weighted photon-number charge conserved by the lossless interaction:
/// direct a a+ + 3 b b+, cascade a0 a0+ + 2 a1 a1+ + 3 a2 a2+.
Complex conserved_charge(std::span<const Complex> vars, ModelKind kind);

/// Deterministic initial conditions for coherent-state pumping (zero initial
/// phase-space spread).
std::array<Complex, 4> coherent_initial_direct(Complex alpha0, Complex beta0 = {0.0, 0.0});
std::array<Complex, 6> coherent_initial_cascade(Complex a0, Complex a1 = {0.0, 0.0},
                                                Complex a2 = {0.0, 0.0});

/// Noise-free equations restricted to the conjugate manifold
/// (alpha_plus == conj(alpha)); state is the vector of mode amplitudes.
struct ClassicalDirect {
    static constexpr int n_modes = 2;
    DirectParams p;
    explicit ClassicalDirect(DirectParams params) : p(params) { p.validate(); }
    void rhs(const Complex* a, Complex* f) const {
        const Complex ac = std::conj(a[0]);
        f[0] = p.epsilon - p.gamma_a * a[0] + p.kappa * ac * ac * a[1];
        f[1] = -p.gamma_b * a[1] - (p.kappa / 3.0) * a[0] * a[0] * a[0];
    }
};

struct ClassicalCascade {
    static constexpr int n_modes = 3;
    CascadeParams p;
    explicit ClassicalCascade(CascadeParams params) : p(params) { p.validate(); }
    void rhs(const Complex* a, Complex* f) const {
        const Complex a0c = std::conj(a[0]);
        const Complex a1c = std::conj(a[1]);
        f[0] = p.epsilon - p.gamma0 * a[0] - 2.0 * p.kappa1 * a0c * a[1] -
               p.kappa2 * a1c * a[2];
        f[1] = -p.gamma1 * a[1] + p.kappa1 * a[0] * a[0] - p.kappa2 * a0c * a[2];
        f[2] = -p.gamma2 * a[2] + p.kappa2 * a[0] * a[1];
    }
};

/// Noise-free drift on the conjugate manifold, returned in full doubled form
/// with deriv(alpha_plus) = conj(deriv(alpha)).
SystemState classical_rhs(const SystemState& state, const DirectParams& p);
SystemState classical_rhs(const SystemState& state, const CascadeParams& p);

struct ClassicalTrajectory {
    std::vector<double> times;
    std::vector<std::vector<Complex>> amplitudes;  // per time, n_modes entries
};

/// Classic RK4 integration of the noise-free equations; records every
/// `stride`-th step including t = 0.
template <class M>
ClassicalTrajectory classical_trajectory(const M& model, std::span<const Complex> initial,
                                         double dt, std::uint64_t n_steps, int stride) {
    const int n = M::n_modes;
    std::vector<Complex> y(initial.begin(), initial.end());
    std::vector<Complex> k1(n), k2(n), k3(n), k4(n), tmp(n);
    ClassicalTrajectory out;
    out.times.push_back(0.0);
    out.amplitudes.push_back(y);
    for (std::uint64_t s = 1; s <= n_steps; ++s) {
        model.rhs(y.data(), k1.data());
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        model.rhs(tmp.data(), k2.data());
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        model.rhs(tmp.data(), k3.data());
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
        model.rhs(tmp.data(), k4.data());
        for (int i = 0; i < n; ++i)
            y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (s % static_cast<std::uint64_t>(stride) == 0) {
            out.times.push_back(static_cast<double>(s) * dt);
            out.amplitudes.push_back(y);
        }
    }
    return out;
}

}  // namespace thg
