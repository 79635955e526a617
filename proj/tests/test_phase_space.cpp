#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "thg/phase_space.hpp"

using thg::Complex;
using thg::ModeAmplitude;

TEST_CASE("quadrature of a real coherent amplitude") {
    const ModeAmplitude m{{1.0, 0.0}, {1.0, 0.0}};
    const Complex x = thg::quadrature(m, 0.0);
    CHECK(x.real() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(x.imag() == 0.0);

    const Complex y = thg::quadrature(m, M_PI_2);
    CHECK(std::abs(y) < 1e-15);
}

TEST_CASE("quadrature arithmetic oracle") {
    // alpha = 0.3 + 0.4i, conjugate-paired, theta = 0: X = 2 Re(alpha) = 0.6.
    const ModeAmplitude m = ModeAmplitude::coherent({0.3, 0.4});
    const Complex x = thg::quadrature(m, 0.0);
    CHECK(x.real() == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(x.imag() == 0.0);
}

TEST_CASE("quadrature is real on the conjugate manifold, complex off it") {
    const ModeAmplitude paired = ModeAmplitude::coherent({1.2, -0.7});
    CHECK(thg::quadrature(paired, 0.31).imag() == doctest::Approx(0.0).epsilon(1e-15));

    const ModeAmplitude free_pair{{1.0, 0.5}, {2.0, 0.25}};
    CHECK(thg::quadrature(free_pair, 0.0).imag() != 0.0);
}

TEST_CASE("quadrature 2pi periodicity") {
    const ModeAmplitude m{{3.25, -1.5}, {0.75, 2.0}};
    // Angles whose +2pi shift is exactly representable: bit-identical results.
    for (double theta : {0.0, 0.5, -1.5, 3.0}) {
        const double shifted = theta + 6.283185307179586476925286766559;
        const Complex a = thg::quadrature(m, theta);
        const Complex b = thg::quadrature(m, shifted);
        CHECK(a.real() == b.real());
        CHECK(a.imag() == b.imag());
    }
    // Generic angles: periodic to rounding of the shifted argument.
    for (double theta : {0.3, 1.234567, -2.9}) {
        const Complex a = thg::quadrature(m, theta);
        const Complex b = thg::quadrature(m, theta + 6.283185307179586476925286766559);
        CHECK(std::abs(a - b) < 1e-14 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("X and Y quadratures decompose q(theta)") {
    const ModeAmplitude m{{0.4, 1.1}, {-0.2, 0.35}};
    const double theta = 0.77;
    const Complex x = thg::quadrature(m, 0.0);
    const Complex y = thg::quadrature(m, M_PI_2);
    const Complex q = thg::quadrature(m, theta);
    const Complex combo = x * std::cos(theta) + y * std::sin(theta);
    CHECK(std::abs(q - combo) < 1e-14);
}

TEST_CASE("conjugate_paired predicate") {
    CHECK(ModeAmplitude::coherent({2.0, -3.0}).conjugate_paired());
    const ModeAmplitude off{{1.0, 0.0}, {1.0, 0.1}};
    CHECK(!off.conjugate_paired());
}

TEST_CASE("quad_index layout") {
    CHECK(thg::quad_index(0, thg::Quad::X) == 0);
    CHECK(thg::quad_index(0, thg::Quad::Y) == 1);
    CHECK(thg::quad_index(2, thg::Quad::X) == 4);
    CHECK(thg::quad_index(2, thg::Quad::Y) == 5);
}
