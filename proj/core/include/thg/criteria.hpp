#pragma once

#include <array>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "thg/moments.hpp"
#include "thg/phase_space.hpp"

namespace thg {

/// Operator-level quadrature covariance matrix, 2n x 2n, flat index
/// X_i -> 2i, Y_i -> 2i+1. Diagonal entries are operator variances (vacuum =
/// coherent = 1); off-diagonal entries vacuum-free covariances. Both the
/// time-domain moments and the spectral output matrices produce this form, so
/// every criterion below works on either route.
using QuadCov = Eigen::MatrixXd;

/// Builds the operator covariance from accumulated phase-space moments,
/// applying the +1 ordering correction on the diagonal only.
QuadCov quad_covariance(const MomentView& v);

struct DsPair {
    double plus;   // V(X_i + X_j) + V(Y_i - Y_j)
    double minus;  // V(X_i - X_j) + V(Y_i + Y_j)
};

/// Duan-Simon combinations for the (i, j) bipartition; either value below 4
/// certifies bipartite entanglement.
DsPair duan_simon(const QuadCov& v, int i, int j);

/// Reid EPR product of inferred variances for mode `steered`, inferred from
/// quadrature measurements of mode `steerer`; below 1 demonstrates the EPR
/// paradox with `steerer` steering `steered`.
double reid_epr(const QuadCov& v, int steered, int steerer);

enum class SteeringClass {
    none,
    symmetric,
    only_i_steers_j,  // only epr_ji violated
    only_j_steers_i   // only epr_ij violated
};

std::string to_string(SteeringClass s, int i, int j);

/// A direction counts as steering only when its EPR product is below 1 by more
/// than two standard errors. epr_ij has mode i steered by mode j.
SteeringClass classify_steering(double epr_ij, double epr_ji, double stderr);

struct BipartiteReport {
    int i = 0, j = 0;
    double ds_plus = 0, ds_minus = 0;
    double epr_ij = 0, epr_ji = 0;
    double ds_plus_err = 0, ds_minus_err = 0;
    double epr_ij_err = 0, epr_ji_err = 0;
    SteeringClass steering = SteeringClass::none;
};

/// Full bipartite report with Monte Carlo errors from sub-ensemble binning.
BipartiteReport bipartite_report(const QuadratureMoments& m, int i, int j);

struct TripartiteReport {
    // Combination k pairs modes (pair_i, pair_j) with the gain on the third.
    std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {1, 2}, {0, 2}}};
    std::array<double, 3> value{};
    std::array<double, 3> gain{};
    std::array<double, 3> err{};
};

/// van Loock-Furusawa combinations V(X_i - X_j) + V(Y_i + Y_j + g Y_k) with
/// analytically optimal gains (or the supplied ones); any two values below 4
/// certify genuine tripartite entanglement.
TripartiteReport vlf_tripartite(const QuadCov& v,
                                std::optional<std::array<double, 3>> gains = {});

/// Moments route with binned errors (gains fixed from the full ensemble).
TripartiteReport vlf_tripartite(const QuadratureMoments& m,
                                std::optional<std::array<double, 3>> gains = {});

}  // namespace thg
