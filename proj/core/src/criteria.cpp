#include "thg/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "thg/errors.hpp"

namespace thg {

namespace {
constexpr double kHalfPi = 1.5707963267948966;
constexpr double kDegenerateVariance = 1e-12;
}  // namespace

QuadCov quad_covariance(const MomentView& v) {
    const int nq = 2 * v.n_modes();
    QuadCov m(nq, nq);
    for (int i = 0; i < v.n_modes(); ++i) {
        m(2 * i, 2 * i) = v.operator_variance(i, 0.0);
        m(2 * i + 1, 2 * i + 1) = v.operator_variance(i, kHalfPi);
    }
    for (int a = 0; a < nq; ++a)
        for (int b = a + 1; b < nq; ++b) m(a, b) = m(b, a) = v.operator_covariance(a, b);
    return m;
}

DsPair duan_simon(const QuadCov& v, int i, int j) {
    if (i == j) throw Error("duan_simon: bipartition needs two distinct modes");
    const int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
    const double vx_sum = v(xi, xi) + v(xj, xj) + 2.0 * v(xi, xj);
    const double vx_dif = v(xi, xi) + v(xj, xj) - 2.0 * v(xi, xj);
    const double vy_sum = v(yi, yi) + v(yj, yj) + 2.0 * v(yi, yj);
    const double vy_dif = v(yi, yi) + v(yj, yj) - 2.0 * v(yi, yj);
    return {vx_sum + vy_dif, vx_dif + vy_sum};
}

double reid_epr(const QuadCov& v, int steered, int steerer) {
    if (steered == steerer) throw Error("reid_epr: needs two distinct modes");
    const int xi = 2 * steered, yi = 2 * steered + 1;
    const int xj = 2 * steerer, yj = 2 * steerer + 1;
    if (v(xj, xj) <= kDegenerateVariance || v(yj, yj) <= kDegenerateVariance)
        throw DegenerateSteererError(
            "steerer-mode variance is numerically zero; moments are broken");
    const double inf_x = v(xi, xi) - v(xi, xj) * v(xi, xj) / v(xj, xj);
    const double inf_y = v(yi, yi) - v(yi, yj) * v(yi, yj) / v(yj, yj);
    return std::max(0.0, inf_x) * std::max(0.0, inf_y);
}

std::string to_string(SteeringClass s, int i, int j) {
    switch (s) {
        case SteeringClass::none: return "none";
        case SteeringClass::symmetric: return "symmetric";
        case SteeringClass::only_i_steers_j:
            return "asym_" + std::to_string(i) + "_steers_" + std::to_string(j);
        case SteeringClass::only_j_steers_i:
            return "asym_" + std::to_string(j) + "_steers_" + std::to_string(i);
    }
    return "none";
}

SteeringClass classify_steering(double epr_ij, double epr_ji, double stderr) {
    const double bound = 1.0 - 2.0 * stderr;
    const bool j_steers_i = epr_ij < bound;  // j's measurements steer mode i
    const bool i_steers_j = epr_ji < bound;
    if (j_steers_i && i_steers_j) return SteeringClass::symmetric;
    if (j_steers_i) return SteeringClass::only_j_steers_i;
    if (i_steers_j) return SteeringClass::only_i_steers_j;
    return SteeringClass::none;
}

BipartiteReport bipartite_report(const QuadratureMoments& m, int i, int j) {
    BipartiteReport r;
    r.i = i;
    r.j = j;
    auto [dsp, dsp_e] = binned_estimate(
        m, [&](const MomentView& v) { return duan_simon(quad_covariance(v), i, j).plus; });
    auto [dsm, dsm_e] = binned_estimate(
        m, [&](const MomentView& v) { return duan_simon(quad_covariance(v), i, j).minus; });
    auto [eij, eij_e] = binned_estimate(
        m, [&](const MomentView& v) { return reid_epr(quad_covariance(v), i, j); });
    auto [eji, eji_e] = binned_estimate(
        m, [&](const MomentView& v) { return reid_epr(quad_covariance(v), j, i); });
    r.ds_plus = dsp < 0.0 ? 0.0 : dsp;    // clamp, NaN passes through
    r.ds_minus = dsm < 0.0 ? 0.0 : dsm;
    r.epr_ij = eij;
    r.epr_ji = eji;
    r.ds_plus_err = dsp_e;
    r.ds_minus_err = dsm_e;
    r.epr_ij_err = eij_e;
    r.epr_ji_err = eji_e;
    r.steering = classify_steering(eij, eji, std::max(eij_e, eji_e));
    return r;
}

namespace {

double vlf_value(const QuadCov& v, int i, int j, int k, double g) {
    const int xi = 2 * i, yi = 2 * i + 1;
    const int xj = 2 * j, yj = 2 * j + 1;
    const int yk = 2 * k + 1;
    const double vx = v(xi, xi) + v(xj, xj) - 2.0 * v(xi, xj);
    const double vy = v(yi, yi) + v(yj, yj) + 2.0 * v(yi, yj) +
                      g * g * v(yk, yk) +
                      2.0 * g * (v(yi, yk) + v(yj, yk));
    return vx + vy;
}

double vlf_optimal_gain(const QuadCov& v, int i, int j, int k) {
    const int yi = 2 * i + 1, yj = 2 * j + 1, yk = 2 * k + 1;
    if (v(yk, yk) <= kDegenerateVariance) return 0.0;
    return -(v(yi, yk) + v(yj, yk)) / v(yk, yk);
}

}  // namespace

TripartiteReport vlf_tripartite(const QuadCov& v,
                                std::optional<std::array<double, 3>> gains) {
    TripartiteReport r;
    for (int c = 0; c < 3; ++c) {
        const int i = r.pairs[c][0], j = r.pairs[c][1];
        const int k = 3 - i - j;
        r.gain[c] = gains ? (*gains)[c] : vlf_optimal_gain(v, i, j, k);
        const double val = vlf_value(v, i, j, k, r.gain[c]);
        r.value[c] = val < 0.0 ? 0.0 : val;
    }
    return r;
}

TripartiteReport vlf_tripartite(const QuadratureMoments& m,
                                std::optional<std::array<double, 3>> gains) {
    TripartiteReport r = vlf_tripartite(quad_covariance(m.total()), gains);
    for (int c = 0; c < 3; ++c) {
        const int i = r.pairs[c][0], j = r.pairs[c][1];
        const int k = 3 - i - j;
        const double g = r.gain[c];
        auto [val, err] = binned_estimate(m, [&](const MomentView& v) {
            return vlf_value(quad_covariance(v), i, j, k, g);
        });
        (void)val;  // headline value stays the full-ensemble one
        r.err[c] = err;
    }
    return r;
}

}  // namespace thg
