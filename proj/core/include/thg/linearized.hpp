#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thg/criteria.hpp"
#include "thg/models.hpp"
#include "thg/phase_space.hpp"

namespace thg {

/// Conjugate-paired steady state of the intracavity classical equations.
/// Eigenvalues are those of the fluctuation drift matrix A (sign convention
/// d(delta)/dt = -A delta + B dW), so stability means all real parts > 0.
struct SteadyState {
    std::vector<Complex> amplitudes;  // n_modes entries
    double residual_norm = 0.0;
    std::vector<Complex> drift_eigenvalues;

    bool stable() const {
        for (const auto& ev : drift_eigenvalues)
            if (ev.real() <= 0.0) return false;
        return true;
    }
};

/// Linearized intracavity model: drift matrix A, diffusion matrix D evaluated
/// at the steady state, and the per-mode cavity loss rates. Basis order
/// matches the stochastic variable layout (alpha_0, alpha_0^+, alpha_1, ...).
struct FluctuationModel {
    Eigen::MatrixXcd A;
    Eigen::MatrixXcd D;
    Eigen::VectorXd loss_rates;  // n_modes
};

/// Real-amplitude steady state of the direct system via a bracketed 1-D root
/// find of the pump-balance quintic; unique for real pump >= 0.
SteadyState steady_state_direct(const DirectParams& p);

/// Steady state of the cascade system: damped Newton on the three complex
/// classical equations, seeded by long-time classical relaxation.
SteadyState steady_state_cascade(const CascadeParams& p);

/// A = -(Jacobian of the noise-free drift) and analytic D at the steady state.
FluctuationModel build_fluctuation_model(const DirectParams& p, const SteadyState& ss);
FluctuationModel build_fluctuation_model(const CascadeParams& p, const SteadyState& ss);

/// Pump amplitude above which the direct-system drift matrix acquires
/// eigenvalues with negative real part (onset of self-pulsing).
double critical_pump_direct(const DirectParams& p);

struct SpectralResult {
    Eigen::VectorXd omega;                    // units of the reference loss rate
    std::vector<Eigen::MatrixXcd> intracavity;  // S(omega) per grid point
};

/// Stationary intracavity spectrum S(w) = (A + iw)^-1 D (A^T - iw)^-1,
/// evaluated by two linear solves per frequency. Throws InstabilityError if
/// any drift eigenvalue has non-positive real part.
SpectralResult ou_spectrum(const FluctuationModel& fm, std::span<const double> omega_grid);
Eigen::MatrixXcd intracavity_spectrum_at(const FluctuationModel& fm, double omega);

/// Output quadrature covariance at one frequency: quadrature transform of the
/// intracavity spectrum, symmetrized over +-omega, scaled by 2 sqrt(g_i g_j),
/// on top of the unit vacuum baseline. The result is a QuadCov, so all
/// entanglement criteria apply directly.
QuadCov output_covariance_at(const FluctuationModel& fm, double omega);

/// Grid version aligned with `spectral.omega`.
std::vector<QuadCov> output_quadrature_spectra(const FluctuationModel& fm,
                                               const SpectralResult& spectral);

/// Stationary phase-space covariance from the Lyapunov equation
/// A C + C A^T = D (algebraic route).
Eigen::MatrixXcd stationary_covariance(const FluctuationModel& fm);

/// The same covariance as the frequency integral of S over the real line,
/// evaluated by quadrature on a compactified grid (numeric route).
Eigen::MatrixXcd integrated_spectrum(const FluctuationModel& fm, int n_nodes = 4097);

struct PairMinima {
    int i = 0, j = 0;
    double ds_plus = 0, ds_plus_omega = 0;
    double ds_minus = 0, ds_minus_omega = 0;
    double epr_ij = 0, epr_ij_omega = 0;
    double epr_ji = 0, epr_ji_omega = 0;
    SteeringClass steering = SteeringClass::none;
};

struct SweepPoint {
    double epsilon = 0.0;
    bool stable = false;  // unstable pumps are flagged and carry no minima
    std::vector<PairMinima> pairs;
    std::array<double, 3> vlf_min{};    // cascade only
    std::array<double, 3> vlf_omega{};  // argmin frequencies
};

/// Minimum output-spectral criteria over frequency, per pump amplitude:
/// steady state -> fluctuation model -> output spectra -> criteria minima
/// (grid scan plus local golden-section refinement).
std::vector<SweepPoint> pump_sweep(const DirectParams& base, std::span<const double> pumps,
                                   std::span<const double> omega_grid);
std::vector<SweepPoint> pump_sweep(const CascadeParams& base, std::span<const double> pumps,
                                   std::span<const double> omega_grid);

}  // namespace thg
