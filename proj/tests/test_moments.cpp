#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "thg/errors.hpp"
#include "thg/moments.hpp"
#include "thg/rng.hpp"

using thg::Complex;
using thg::MomentSums;
using thg::Quad;
using thg::QuadratureMoments;

namespace {

// Conjugate-paired two-mode sample with X quadratures (2*re0, 2*re1).
std::vector<Complex> sample2(double re0, double re1, double im0 = 0.0, double im1 = 0.0) {
    return {Complex{re0, im0}, std::conj(Complex{re0, im0}), Complex{re1, im1},
            std::conj(Complex{re1, im1})};
}

bool sums_equal(const MomentSums& a, const MomentSums& b) {
    if (a.count != b.count) return false;
    for (std::size_t i = 0; i < a.sum_q.size(); ++i)
        if (a.sum_q[i] != b.sum_q[i]) return false;
    for (std::size_t i = 0; i < a.sum_qq.size(); ++i)
        if (a.sum_qq[i] != b.sum_qq[i]) return false;
    for (std::size_t i = 0; i < a.sum_n.size(); ++i)
        if (a.sum_n[i] != b.sum_n[i]) return false;
    return true;
}

bool accumulators_equal(const QuadratureMoments& a, const QuadratureMoments& b) {
    if (a.n_modes() != b.n_modes() || a.n_bins() != b.n_bins()) return false;
    for (int i = 0; i < a.n_bins(); ++i)
        if (!sums_equal(a.bin(i), b.bin(i))) return false;
    return true;
}

}  // namespace

TEST_CASE("vacuum ensemble reads vacuum variances") {
    QuadratureMoments m(2, 4);
    const auto s = sample2(0.0, 0.0);
    for (int i = 0; i < 8; ++i) m.add_sample(s.data(), i % 4);
    const auto v = m.total();
    CHECK(v.operator_variance(0, 0.0) == 1.0);
    CHECK(v.operator_variance(1, M_PI_2) == 1.0);
    CHECK(v.mean_intensity(0) == 0.0);
}

TEST_CASE("coherent ensemble is minimum-uncertainty exactly") {
    QuadratureMoments m(2, 2);
    const auto s = sample2(2.0, 0.0);  // alpha = 2, identical samples
    for (int i = 0; i < 4; ++i) m.add_sample(s.data(), i % 2);
    const auto v = m.total();
    CHECK(v.operator_variance(0, 0.0) == 1.0);
    CHECK(v.operator_variance(0, M_PI_2) == 1.0);
    CHECK(v.mean_intensity(0) == 4.0);
}

TEST_CASE("correlated and anti-correlated synthetic covariances") {
    // X_0 = X_1 sample by sample, integer values: exact arithmetic.
    QuadratureMoments same(2, 1);
    QuadratureMoments anti(2, 1);
    const double xs[4] = {2.0, -2.0, 4.0, -4.0};
    for (double x : xs) {
        const auto s = sample2(x / 2.0, x / 2.0);
        same.add_sample(s.data(), 0);
        const auto a = sample2(x / 2.0, -x / 2.0);
        anti.add_sample(a.data(), 0);
    }
    const double v = (4.0 + 4.0 + 16.0 + 16.0) / 4.0;  // population variance
    CHECK(same.total().operator_covariance(0, 2) == v);
    CHECK(anti.total().operator_covariance(0, 2) == -v);
    // Independent coherent ensembles: zero covariance.
    QuadratureMoments indep(2, 1);
    for (double x : xs) indep.add_sample(sample2(x / 2.0, 1.0).data(), 0);
    CHECK(indep.total().operator_covariance(0, 2) == 0.0);
}

TEST_CASE("operator covariance rejects identical quadrature") {
    QuadratureMoments m(2, 1);
    m.add_sample(sample2(1.0, 2.0).data(), 0);
    m.add_sample(sample2(2.0, 1.0).data(), 0);
    CHECK_THROWS_AS((void)m.total().operator_covariance(0, 0), thg::Error);
}

TEST_CASE("variance requires two samples") {
    QuadratureMoments m(2, 1);
    m.add_sample(sample2(1.0, 2.0).data(), 0);
    CHECK_THROWS_AS((void)m.total().operator_variance(0, 0.0),
                    thg::InsufficientSamplesError);
}

TEST_CASE("merge identity and mean of two singletons") {
    QuadratureMoments acc(2, 3);
    acc.add_sample(sample2(1.5, -0.25).data(), 1);
    acc.add_sample(sample2(-3.0, 0.5).data(), 2);
    const QuadratureMoments empty(2, 3);
    CHECK(accumulators_equal(QuadratureMoments::merged(acc, empty), acc));
    CHECK(accumulators_equal(QuadratureMoments::merged(empty, acc), acc));

    QuadratureMoments a(1, 1), b(1, 1);
    const Complex xa[2] = {{1.0, 0.0}, {1.0, 0.0}};
    const Complex xb[2] = {{3.0, 0.0}, {3.0, 0.0}};
    a.add_sample(xa, 0);
    b.add_sample(xb, 0);
    const auto ab = QuadratureMoments::merged(a, b);
    CHECK(ab.sample_count() == 2);
    CHECK(ab.total().mean_quadrature(0, Quad::X) == (2.0 + 6.0) / 2.0);
}

TEST_CASE("fixed pairwise reduction tree over four chunks") {
    std::vector<QuadratureMoments> chunks;
    thg::GaussianStream g(11, 0);
    for (int c = 0; c < 4; ++c) {
        QuadratureMoments m(2, 1);
        for (int k = 0; k < 7; ++k) {
            const auto s = sample2(g.next(), g.next(), g.next(), g.next());
            m.add_sample(s.data(), 0);
        }
        chunks.push_back(m);
    }
    const auto tree = thg::reduce_pairwise(chunks);
    // The documented tree for four chunks is merge(merge(0,1), merge(2,3)).
    const auto ref = QuadratureMoments::merged(
        QuadratureMoments::merged(chunks[0], chunks[1]),
        QuadratureMoments::merged(chunks[2], chunks[3]));
    CHECK(accumulators_equal(tree, ref));
    CHECK(tree.sample_count() == 28);
}

TEST_CASE("merge rejects mismatched layouts") {
    QuadratureMoments a(2, 4), b(3, 4), c(2, 8);
    CHECK_THROWS_AS((void)QuadratureMoments::merged(a, b), thg::GridMismatchError);
    CHECK_THROWS_AS((void)QuadratureMoments::merged(a, c), thg::GridMismatchError);
}

TEST_CASE("count additivity under merge") {
    QuadratureMoments a(1, 2), b(1, 2);
    const Complex s[2] = {{0.5, 0.0}, {0.5, 0.0}};
    for (int i = 0; i < 5; ++i) a.add_sample(s, i % 2);
    for (int i = 0; i < 9; ++i) b.add_sample(s, i % 2);
    CHECK(QuadratureMoments::merged(a, b).sample_count() == 14);
}

TEST_CASE("coherent gaussian ensemble: variance 1 within 5 standard errors") {
    // Classical coherent-state phase-space samples around alpha = 2 would have
    // zero spread; here we smear X with a known classical variance and check
    // the operator estimate 1 + v against the binned error bar.
    const double v_true = 0.04;
    QuadratureMoments m(1, 100);
    thg::GaussianStream g(21, 9);
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = 2.0 + std::sqrt(v_true) * g.next();
        const Complex s[2] = {{x, 0.0}, {x, 0.0}};
        m.add_sample(s, i * 100 / n);
    }
    auto [val, err] = thg::binned_estimate(
        m, [](const thg::MomentView& view) { return view.operator_variance(0, 0.0); });
    CHECK(err > 0.0);
    CHECK(err < 0.01);
    CHECK(std::abs(val - (1.0 + 4.0 * v_true)) < 5.0 * err);
}

TEST_CASE("general-angle variance interpolates X and Y") {
    QuadratureMoments m(1, 1);
    thg::GaussianStream g(4, 4);
    for (int i = 0; i < 5000; ++i) {
        const Complex a{0.3 * g.next(), 0.1 * g.next()};
        const Complex s[2] = {a, std::conj(a)};
        m.add_sample(s, 0);
    }
    const auto view = m.total();
    const double theta = 0.61;
    const double direct_v = view.operator_variance(0, theta);
    const double c = std::cos(theta), s = std::sin(theta);
    const double combo = 1.0 + c * c * (view.operator_variance(0, 0.0) - 1.0) +
                         s * s * (view.operator_variance(0, M_PI_2) - 1.0) +
                         2.0 * c * s * view.operator_covariance(0, 1);
    CHECK(direct_v == doctest::Approx(combo).epsilon(1e-12));
}
