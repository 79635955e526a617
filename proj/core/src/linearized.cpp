#include "thg/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "thg/errors.hpp"

namespace thg {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

std::vector<Complex> doubled_state(std::span<const Complex> amps) {
    std::vector<Complex> s(2 * amps.size());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        s[2 * i] = amps[i];
        s[2 * i + 1] = std::conj(amps[i]);
    }
    return s;
}

/// Jacobian of the noise-free drift in the doubled variables
/// (alpha, alpha_plus, ...) treated as independent coordinates.
MatrixXcd drift_jacobian(const DirectParams& p, std::span<const Complex> s) {
    const Complex a = s[0], ap = s[1], b = s[2], bp = s[3];
    MatrixXcd j = MatrixXcd::Zero(4, 4);
    j(0, 0) = -p.gamma_a;
    j(0, 1) = 2.0 * p.kappa * ap * b;
    j(0, 2) = p.kappa * ap * ap;
    j(1, 0) = 2.0 * p.kappa * a * bp;
    j(1, 1) = -p.gamma_a;
    j(1, 3) = p.kappa * a * a;
    j(2, 0) = -p.kappa * a * a;
    j(2, 2) = -p.gamma_b;
    j(3, 1) = -p.kappa * ap * ap;
    j(3, 3) = -p.gamma_b;
    return j;
}

MatrixXcd drift_jacobian(const CascadeParams& p, std::span<const Complex> s) {
    const Complex a0 = s[0], a0p = s[1], a1 = s[2], a1p = s[3], a2 = s[4], a2p = s[5];
    MatrixXcd j = MatrixXcd::Zero(6, 6);
    j(0, 0) = -p.gamma0;
    j(0, 1) = -2.0 * p.kappa1 * a1;
    j(0, 2) = -2.0 * p.kappa1 * a0p;
    j(0, 3) = -p.kappa2 * a2;
    j(0, 4) = -p.kappa2 * a1p;
    j(1, 0) = -2.0 * p.kappa1 * a1p;
    j(1, 1) = -p.gamma0;
    j(1, 2) = -p.kappa2 * a2p;
    j(1, 3) = -2.0 * p.kappa1 * a0;
    j(1, 5) = -p.kappa2 * a1;
    j(2, 0) = 2.0 * p.kappa1 * a0;
    j(2, 1) = -p.kappa2 * a2;
    j(2, 2) = -p.gamma1;
    j(2, 4) = -p.kappa2 * a0p;
    j(3, 0) = -p.kappa2 * a2p;
    j(3, 1) = 2.0 * p.kappa1 * a0p;
    j(3, 3) = -p.gamma1;
    j(3, 5) = -p.kappa2 * a0;
    j(4, 0) = p.kappa2 * a1;
    j(4, 2) = p.kappa2 * a0;
    j(4, 4) = -p.gamma2;
    j(5, 1) = p.kappa2 * a1p;
    j(5, 3) = p.kappa2 * a0p;
    j(5, 5) = -p.gamma2;
    return j;
}

std::vector<Complex> eigenvalues_of(const MatrixXcd& a) {
    Eigen::ComplexEigenSolver<MatrixXcd> es(a, /*computeEigenvectors=*/false);
    std::vector<Complex> ev(es.eigenvalues().data(),
                            es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](Complex l, Complex r) {
        return l.real() != r.real() ? l.real() < r.real() : l.imag() < r.imag();
    });
    return ev;
}

double real_pump(const Complex& eps, const char* who) {
    if (eps.imag() != 0.0 || eps.real() < 0.0)
        throw ConfigError(std::string(who) + " expects a real pump >= 0", -1, "epsilon");
    return eps.real();
}

template <class Params>
double residual_of(const Params& p, std::span<const Complex> amps);

template <>
double residual_of(const DirectParams& p, std::span<const Complex> amps) {
    ClassicalDirect m(p);
    Complex f[2];
    m.rhs(amps.data(), f);
    return std::sqrt(std::norm(f[0]) + std::norm(f[1]));
}

template <>
double residual_of(const CascadeParams& p, std::span<const Complex> amps) {
    ClassicalCascade m(p);
    Complex f[3];
    m.rhs(amps.data(), f);
    return std::sqrt(std::norm(f[0]) + std::norm(f[1]) + std::norm(f[2]));
}

}  // namespace

SteadyState steady_state_direct(const DirectParams& p) {
    if (p.gamma_a <= 0.0 || p.gamma_b <= 0.0)
        throw ConfigError("steady state needs positive cavity losses", -1, "gamma_a");
    const double eps = real_pump(p.epsilon, "steady_state_direct");

    // eps = gamma_a x + (kappa^2 / 3 gamma_b) x^5, monotone for x >= 0.
    const double c5 = p.kappa * p.kappa / (3.0 * p.gamma_b);
    double x = 0.0;
    if (eps > 0.0) {
        double hi = eps / p.gamma_a;
        if (c5 > 0.0) hi = std::min(hi, std::pow(eps / c5, 0.2));
        hi *= 1.0 + 1e-12;
        double lo = 0.0;
        auto g = [&](double v) { return p.gamma_a * v + c5 * v * v * v * v * v - eps; };
        x = hi;
        for (int it = 0; it < 200; ++it) {
            const double gx = g(x);
            if (gx > 0.0)
                hi = x;
            else
                lo = x;
            const double dg = p.gamma_a + 5.0 * c5 * x * x * x * x;
            double nx = x - gx / dg;
            if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
            if (std::abs(nx - x) <= 1e-16 * std::max(1.0, x)) {
                x = nx;
                break;
            }
            x = nx;
        }
    }

    SteadyState ss;
    ss.amplitudes = {Complex{x, 0.0},
                     Complex{-p.kappa * x * x * x / (3.0 * p.gamma_b), 0.0}};
    ss.residual_norm = residual_of(p, ss.amplitudes);
    const auto s = doubled_state(ss.amplitudes);
    ss.drift_eigenvalues = eigenvalues_of(-drift_jacobian(p, s));
    if (ss.residual_norm > 1e-10)
        throw ConvergenceError("steady_state_direct root find failed", ss.residual_norm);
    return ss;
}

namespace {

/// Real 2n x 2n Jacobian of the conjugate-manifold equations in
/// (Re, Im) coordinates, from the complex doubled-variable Jacobian.
template <class Params>
MatrixXd manifold_jacobian(const Params& p, std::span<const Complex> amps) {
    const int n = static_cast<int>(amps.size());
    const auto s = doubled_state(amps);
    const MatrixXcd j = drift_jacobian(p, s);
    MatrixXd jr(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const Complex dfdx = j(2 * i, 2 * k) + j(2 * i, 2 * k + 1);
            const Complex dfdy =
                Complex{0.0, 1.0} * (j(2 * i, 2 * k) - j(2 * i, 2 * k + 1));
            jr(2 * i, 2 * k) = dfdx.real();
            jr(2 * i + 1, 2 * k) = dfdx.imag();
            jr(2 * i, 2 * k + 1) = dfdy.real();
            jr(2 * i + 1, 2 * k + 1) = dfdy.imag();
        }
    }
    return jr;
}

}  // namespace

SteadyState steady_state_cascade(const CascadeParams& p) {
    if (p.gamma0 <= 0.0 || p.gamma1 <= 0.0 || p.gamma2 <= 0.0)
        throw ConfigError("steady state needs positive cavity losses", -1, "gamma0");
    const double eps = real_pump(p.epsilon, "steady_state_cascade");

    ClassicalCascade model(p);
    std::vector<Complex> amps(3, Complex{0.0, 0.0});
    if (eps > 0.0) {
        // Long-time relaxation seeds Newton inside the right basin.
        const double gmax = std::max({p.gamma0, p.gamma1, p.gamma2, 1.0});
        const double dt = 0.02 / gmax;
        const auto relax =
            classical_trajectory(model, amps, dt, static_cast<std::uint64_t>(400.0 / dt),
                                 static_cast<int>(400.0 / dt));
        amps = relax.amplitudes.back();

        Complex f[3];
        auto fvec = [&](const std::vector<Complex>& a) {
            model.rhs(a.data(), f);
            VectorXd r(6);
            for (int i = 0; i < 3; ++i) {
                r(2 * i) = f[i].real();
                r(2 * i + 1) = f[i].imag();
            }
            return r;
        };

        VectorXd r = fvec(amps);
        double best = r.norm();
        for (int it = 0; it < 100 && best > 1e-13 * std::max(1.0, eps); ++it) {
            const MatrixXd jr = manifold_jacobian(p, amps);
            const VectorXd du = jr.partialPivLu().solve(-r);
            double lambda = 1.0;
            std::vector<Complex> trial(3);
            for (int bt = 0; bt < 40; ++bt, lambda *= 0.5) {
                for (int i = 0; i < 3; ++i)
                    trial[i] = amps[i] + lambda * Complex{du(2 * i), du(2 * i + 1)};
                const VectorXd rt = fvec(trial);
                if (rt.norm() < (1.0 - 1e-4 * lambda) * best) {
                    amps = trial;
                    r = rt;
                    best = rt.norm();
                    break;
                }
            }
        }
    }

    SteadyState ss;
    ss.amplitudes = amps;
    ss.residual_norm = residual_of(p, ss.amplitudes);
    const auto s = doubled_state(ss.amplitudes);
    ss.drift_eigenvalues = eigenvalues_of(-drift_jacobian(p, s));
    if (ss.residual_norm > 1e-10)
        throw ConvergenceError("steady_state_cascade Newton did not converge",
                               ss.residual_norm);
    return ss;
}

FluctuationModel build_fluctuation_model(const DirectParams& p, const SteadyState& ss) {
    const auto s = doubled_state(ss.amplitudes);
    FluctuationModel fm;
    fm.A = -drift_jacobian(p, s);
    const auto d = diffusion_direct(p, s);
    fm.D = Eigen::Map<const MatrixXcd>(d.data(), 4, 4).transpose();
    fm.loss_rates = VectorXd(2);
    fm.loss_rates << p.gamma_a, p.gamma_b;
    return fm;
}

FluctuationModel build_fluctuation_model(const CascadeParams& p, const SteadyState& ss) {
    const auto s = doubled_state(ss.amplitudes);
    FluctuationModel fm;
    fm.A = -drift_jacobian(p, s);
    const auto d = diffusion_cascade(p, s);
    fm.D = Eigen::Map<const MatrixXcd>(d.data(), 6, 6).transpose();
    fm.loss_rates = VectorXd(3);
    fm.loss_rates << p.gamma0, p.gamma1, p.gamma2;
    return fm;
}

double critical_pump_direct(const DirectParams& p) {
    if (p.kappa <= 0.0 || p.gamma_a <= 0.0 || p.gamma_b <= 0.0)
        throw ConfigError("critical pump needs kappa, gamma_a, gamma_b > 0", -1, "kappa");
    const double r = p.gamma_b / p.gamma_a;
    const double k = p.kappa * p.kappa / (9.0 * p.gamma_a * p.gamma_b);
    return std::pow(6.0 * k, -0.25) *
           (std::pow(1.0 + r, 0.25) + 0.5 * std::pow(1.0 + r, 1.25));
}

namespace {

void require_stable(const FluctuationModel& fm) {
    const auto ev = eigenvalues_of(fm.A);
    for (const auto& l : ev)
        if (l.real() <= 0.0)
            throw InstabilityError(
                "drift matrix has an eigenvalue with real part " +
                std::to_string(l.real()) + "; no stationary spectrum exists");
}

MatrixXcd spectrum_at_unchecked(const FluctuationModel& fm, double omega) {
    const int n = static_cast<int>(fm.A.rows());
    const MatrixXcd m1 = fm.A + Complex{0.0, omega} * MatrixXcd::Identity(n, n);
    const MatrixXcd x = m1.partialPivLu().solve(fm.D);
    // S (A^T - iw)^-1 solved from the right via the transposed system.
    const MatrixXcd m2 = fm.A - Complex{0.0, omega} * MatrixXcd::Identity(n, n);
    return m2.partialPivLu().solve(x.transpose()).transpose();
}

MatrixXcd quad_transform(int n_modes) {
    MatrixXcd t = MatrixXcd::Zero(2 * n_modes, 2 * n_modes);
    for (int i = 0; i < n_modes; ++i) {
        t(2 * i, 2 * i) = 1.0;
        t(2 * i, 2 * i + 1) = 1.0;
        t(2 * i + 1, 2 * i) = Complex{0.0, -1.0};
        t(2 * i + 1, 2 * i + 1) = Complex{0.0, 1.0};
    }
    return t;
}

}  // namespace

Eigen::MatrixXcd intracavity_spectrum_at(const FluctuationModel& fm, double omega) {
    require_stable(fm);
    return spectrum_at_unchecked(fm, omega);
}

SpectralResult ou_spectrum(const FluctuationModel& fm, std::span<const double> omega_grid) {
    require_stable(fm);
    SpectralResult out;
    out.omega = Eigen::Map<const VectorXd>(omega_grid.data(),
                                           static_cast<Eigen::Index>(omega_grid.size()));
    out.intracavity.reserve(omega_grid.size());
    for (double w : omega_grid) out.intracavity.push_back(spectrum_at_unchecked(fm, w));
    return out;
}

namespace {

QuadCov output_covariance_from(const FluctuationModel& fm, const MatrixXcd& s) {
    const int n = static_cast<int>(fm.loss_rates.size());
    const MatrixXcd t = quad_transform(n);
    const MatrixXcd sq = t * s * t.transpose();
    // S_quad(-w) equals S_quad(w)^T, so the +-w symmetrization is the matrix
    // symmetrization; imaginary parts cancel for conjugate-symmetric steady
    // states.
    const MatrixXcd sym = sq + sq.transpose();
    QuadCov v = QuadCov::Identity(2 * n, 2 * n);
    for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) {
            const double g = std::sqrt(fm.loss_rates(a / 2) * fm.loss_rates(b / 2));
            v(a, b) += g * sym(a, b).real();
        }
    return v;
}

}  // namespace

QuadCov output_covariance_at(const FluctuationModel& fm, double omega) {
    return output_covariance_from(fm, intracavity_spectrum_at(fm, omega));
}

std::vector<QuadCov> output_quadrature_spectra(const FluctuationModel& fm,
                                               const SpectralResult& spectral) {
    std::vector<QuadCov> out;
    out.reserve(spectral.intracavity.size());
    for (const auto& s : spectral.intracavity)
        out.push_back(output_covariance_from(fm, s));
    return out;
}

Eigen::MatrixXcd stationary_covariance(const FluctuationModel& fm) {
    require_stable(fm);
    const int n = static_cast<int>(fm.A.rows());
    MatrixXcd m = MatrixXcd::Zero(n * n, n * n);
    // vec(A C + C A^T) = (I (x) A + A (x) I) vec(C), column-major vec.
    for (int c = 0; c < n; ++c)
        m.block(c * n, c * n, n, n) += fm.A;
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r)
            for (int i = 0; i < n; ++i) m(c * n + i, r * n + i) += fm.A(c, r);
    VectorXcd d(n * n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) d(c * n + r) = fm.D(r, c);
    const VectorXcd vc = m.partialPivLu().solve(d);
    MatrixXcd cov(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) cov(r, c) = vc(c * n + r);
    return cov;
}

Eigen::MatrixXcd integrated_spectrum(const FluctuationModel& fm, int n_nodes) {
    require_stable(fm);
    if (n_nodes < 5 || n_nodes % 2 == 0)
        throw Error("integrated_spectrum: need an odd node count >= 5");
    const int n = static_cast<int>(fm.A.rows());
    double scale = 1.0;
    for (const auto& l : eigenvalues_of(fm.A)) scale = std::max(scale, std::abs(l));

    // w = scale * tan(u) compactifies the real line; at u = +-pi/2 the
    // integrand S(w) * scale * sec^2(u) tends to D / scale.
    const double du = M_PI / static_cast<double>(n_nodes - 1);
    MatrixXcd acc = MatrixXcd::Zero(n, n);
    for (int k = 0; k < n_nodes; ++k) {
        const double u = -M_PI_2 + k * du;
        MatrixXcd f;
        if (k == 0 || k == n_nodes - 1) {
            f = fm.D / scale;
        } else {
            const double w = scale * std::tan(u);
            const double sec2 = 1.0 + std::tan(u) * std::tan(u);
            f = spectrum_at_unchecked(fm, w) * (scale * sec2);
        }
        const double simpson = (k == 0 || k == n_nodes - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        acc += simpson * f;
    }
    return acc * (du / 3.0) / (2.0 * M_PI);
}

namespace {

double golden_min(const std::function<double(double)>& f, double a, double b,
                  double& argmin) {
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60 && (b - a) > 1e-9 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    argmin = f1 < f2 ? x1 : x2;
    return std::min(f1, f2);
}

struct CurveMin {
    double value;
    double omega;
};

CurveMin refined_min(const FluctuationModel& fm, std::span<const double> omega,
                     const std::vector<QuadCov>& vout,
                     const std::function<double(const QuadCov&)>& metric) {
    std::size_t kmin = 0;
    double best = metric(vout[0]);
    for (std::size_t k = 1; k < vout.size(); ++k) {
        const double m = metric(vout[k]);
        if (m < best) {
            best = m;
            kmin = k;
        }
    }
    const double lo = omega[kmin == 0 ? 0 : kmin - 1];
    const double hi = omega[std::min(vout.size() - 1, kmin + 1)];
    if (hi <= lo) return {best, omega[kmin]};
    double argmin = omega[kmin];
    const double refined = golden_min(
        [&](double w) { return metric(output_covariance_at(fm, w)); }, lo, hi, argmin);
    if (refined < best) return {refined, argmin};
    return {best, omega[kmin]};
}

template <class Params>
SweepPoint sweep_point(const Params& base, double eps, std::span<const double> omega,
                       const std::vector<std::array<int, 2>>& mode_pairs, bool tripartite) {
    Params p = base;
    p.epsilon = Complex{eps, 0.0};
    SweepPoint pt;
    pt.epsilon = eps;
    SteadyState ss;
    try {
        ss = [&] {
            if constexpr (std::is_same_v<Params, DirectParams>)
                return steady_state_direct(p);
            else
                return steady_state_cascade(p);
        }();
    } catch (const ConvergenceError&) {
        pt.stable = false;
        return pt;
    }
    pt.stable = ss.stable();
    if (!pt.stable) return pt;

    const FluctuationModel fm = build_fluctuation_model(p, ss);
    SpectralResult spec = ou_spectrum(fm, omega);
    const auto vout = output_quadrature_spectra(fm, spec);

    for (const auto& [i, j] : mode_pairs) {
        PairMinima pm;
        pm.i = i;
        pm.j = j;
        auto mins = [&](auto&& metric) {
            return refined_min(fm, omega, vout, metric);
        };
        const auto dsp = mins([&](const QuadCov& v) { return duan_simon(v, i, j).plus; });
        const auto dsm = mins([&](const QuadCov& v) { return duan_simon(v, i, j).minus; });
        const auto eij = mins([&](const QuadCov& v) { return reid_epr(v, i, j); });
        const auto eji = mins([&](const QuadCov& v) { return reid_epr(v, j, i); });
        pm.ds_plus = dsp.value;
        pm.ds_plus_omega = dsp.omega;
        pm.ds_minus = dsm.value;
        pm.ds_minus_omega = dsm.omega;
        pm.epr_ij = eij.value;
        pm.epr_ij_omega = eij.omega;
        pm.epr_ji = eji.value;
        pm.epr_ji_omega = eji.omega;
        pm.steering = classify_steering(pm.epr_ij, pm.epr_ji, 0.0);
        pt.pairs.push_back(pm);
    }

    if (tripartite) {
        for (int c = 0; c < 3; ++c) {
            const auto m = refined_min(fm, omega, vout, [&](const QuadCov& v) {
                return vlf_tripartite(v).value[static_cast<std::size_t>(c)];
            });
            pt.vlf_min[static_cast<std::size_t>(c)] = m.value;
            pt.vlf_omega[static_cast<std::size_t>(c)] = m.omega;
        }
    }
    return pt;
}

}  // namespace

std::vector<SweepPoint> pump_sweep(const DirectParams& base, std::span<const double> pumps,
                                   std::span<const double> omega_grid) {
    std::vector<SweepPoint> out;
    out.reserve(pumps.size());
    for (double e : pumps)
        out.push_back(sweep_point(base, e, omega_grid, {{0, 1}}, false));
    return out;
}

std::vector<SweepPoint> pump_sweep(const CascadeParams& base, std::span<const double> pumps,
                                   std::span<const double> omega_grid) {
    std::vector<SweepPoint> out;
    out.reserve(pumps.size());
    for (double e : pumps)
        out.push_back(sweep_point(base, e, omega_grid, {{0, 1}, {1, 2}, {0, 2}}, true));
    return out;
}

}  // namespace thg
