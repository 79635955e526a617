#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace thg {

using Complex = std::complex<double>;

/// One optical mode in the positive-P representation: an *independent* pair
/// (alpha, alpha_plus). For noise-free evolution started conjugate-paired the
/// pair stays conjugate; under stochastic evolution the two explore the
/// doubled phase space independently.
struct ModeAmplitude {
    Complex alpha{0.0, 0.0};
    Complex alpha_plus{0.0, 0.0};

    static ModeAmplitude coherent(Complex amplitude) {
        return {amplitude, std::conj(amplitude)};
    }
    bool conjugate_paired(double tol = 1e-12) const {
        return std::abs(alpha_plus - std::conj(alpha)) <= tol * (1.0 + std::abs(alpha));
    }
};

/// State of a single stochastic trajectory: ordered mode pairs plus the
/// dimensionless time. The mode count is fixed by the model (2 direct,
/// 3 cascade) and never changes during integration.
struct SystemState {
    std::vector<ModeAmplitude> modes;
    double time = 0.0;
};

/// c-number quadrature at angle theta: alpha e^{-i theta} + alpha_plus e^{i theta}.
/// Real whenever alpha_plus = conj(alpha); complex in general for positive-P
/// samples, with imaginary parts averaging to zero. The angle is reduced
/// modulo 2 pi before evaluation, so exactly representable full turns leave
/// the result bit-identical.
inline Complex quadrature(const ModeAmplitude& m, double theta) {
    const double reduced = std::remainder(theta, 6.283185307179586476925286766559);
    const Complex phase{std::cos(reduced), std::sin(reduced)};
    return m.alpha * std::conj(phase) + m.alpha_plus * phase;
}

enum class Quad { X = 0, Y = 1 };

/// Flat quadrature index used by moment accumulators and covariance matrices:
/// X_i -> 2i, Y_i -> 2i+1.
inline int quad_index(int mode, Quad q) { return 2 * mode + static_cast<int>(q); }

}  // namespace thg
