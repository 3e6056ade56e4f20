// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "bounds/bounds.hpp"
#include "common/error.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace fbsde;

namespace {

BoundConstants unit_constants() {
    BoundConstants bc;
    bc.nu = bc.mu = bc.M1 = bc.gamma = 1.0;
    bc.m = [](double) { return 1.0; };
    bc.rho = [](double) { return 1.0; };
    return bc;
}

// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("constant coefficients collapse the X constants") {
    const auto v = x_constants(1.0, unit_constants());
    CHECK(v.lower == 1.0);
    CHECK(v.upper == 1.0);
}

TEST_CASE("X constants closed form") {
    BoundConstants bc;
    bc.nu = 0.8;
    bc.mu = 1.2;
    bc.M_psi = 0.3;
    const auto v = x_constants(0.5, bc);
    CHECK(v.lower == doctest::Approx(0.5 * 0.64 * std::exp(-0.3)).epsilon(1e-15));
    CHECK(v.upper == doctest::Approx(0.5 * 1.44 * std::exp(0.3)).epsilon(1e-15));
    CHECK(v.lower == doctest::Approx(0.2370618306).scale(0).epsilon(1e-9));
    CHECK(v.upper == doctest::Approx(0.9718983415).scale(0).epsilon(1e-9));
    CHECK(x_constants(1e-9, bc).upper == doctest::Approx(1.44e-9).epsilon(1e-6));
    CHECK_THROWS_AS(x_constants(0.0, bc), ArgumentError);
}

TEST_CASE("Y constants closed form") {
    BoundConstants bc;
    bc.nu = 0.8;
    bc.mu = 1.2;
    bc.M_psi = 0.3;
    bc.M1 = 2.0;
    bc.m = [](double) { return 0.3160; };
    const auto v = y_constants(0.5, bc);
    CHECK(v.lower == doctest::Approx(0.023672046158).scale(0).epsilon(1e-9));
    CHECK(v.upper == doctest::Approx(3.8875933658).scale(0).epsilon(1e-9));
    CHECK(v.lower <= v.upper);
    const auto unit = y_constants(0.7, unit_constants());
    CHECK(unit.lower == doctest::Approx(0.7));
    CHECK(unit.upper == doctest::Approx(0.7));
}

TEST_CASE("Y constants refuse a vanishing m") {
    BoundConstants bc = unit_constants();
    bc.m = [](double) { return 0.0; };
    CHECK_THROWS_AS(y_constants(0.5, bc), RefusedError);
    bc.m = nullptr;
    CHECK_THROWS_AS(y_constants(0.5, bc), RefusedError);
}

TEST_CASE("Z constants closed form") {
    const auto unit = z_constants(0.4, unit_constants());
    CHECK(unit.lower == doctest::Approx(0.4));
    CHECK(unit.upper == doctest::Approx(0.4));
    BoundConstants bc = unit_constants();
    bc.mu = 1.2;
    bc.gamma = 2.5;
    bc.M_psi = 0.1;
    CHECK(z_constants(1.0, bc).upper == doctest::Approx(10.9926248234).scale(0).epsilon(1e-9));
    bc.rho = [](double) { return 0.0; };
    CHECK_THROWS_AS(z_constants(1.0, bc), RefusedError);
}

TEST_CASE("constants scale linearly in t without psi") {
    const BoundConstants bc = unit_constants();
    for (double t : {0.1, 0.3, 0.9}) {
        CHECK(x_constants(t, bc).lower == doctest::Approx(t));
        CHECK(y_constants(t, bc).upper == doctest::Approx(t));
        CHECK(z_constants(t, bc).lower == doctest::Approx(t));
    }
}

TEST_CASE("unit envelope is the standard normal density") {
    EnvelopeParams ep{0.0, std::sqrt(2.0 / std::numbers::pi), 1.0, 1.0};
    CHECK(ep.absdev == doctest::Approx(0.797885).epsilon(1e-6));
    const auto e0 = envelope_density(0.0, ep);
    CHECK(e0.lower == doctest::Approx(0.398942).epsilon(1e-6));
    for (double x : {-3.0, -0.4, 0.0, 1.1, 2.5}) {
        const auto e = envelope_density(x, ep);
        CHECK(e.lower == doctest::Approx(testing::normal_pdf(x, 0.0, 1.0)).epsilon(1e-14));
        CHECK(std::abs(e.upper - e.lower) <= 1e-16);
    }
}

TEST_CASE("envelope ordering and peak values") {
    EnvelopeParams ep{0.3, 0.5, 0.4, 1.5};
    const auto at_mean = envelope_density(0.3, ep);
    CHECK(at_mean.lower == doctest::Approx(0.5 / 3.0));
    CHECK(at_mean.upper == doctest::Approx(0.5 / 0.8));
    for (double x = -5.0; x <= 5.0; x += 0.25) {
        const auto e = envelope_density(x, ep);
        CHECK(e.lower <= e.upper);
    }
    CHECK_THROWS_AS((EnvelopeParams{0.0, 0.5, 2.0, 1.0}.validate()), ArgumentError);
    CHECK_THROWS_AS((EnvelopeParams{0.0, -0.1, 1.0, 1.0}.validate()), ArgumentError);
}

TEST_CASE("envelope integrals bracket one") {
    // Gaussian F with variance s2 satisfies the hypothesis with l = L = s2.
    for (double s2 : {0.2, 1.0, 3.0}) {
        const double s = std::sqrt(s2);
        EnvelopeParams ep{0.1, s * std::sqrt(2.0 / std::numbers::pi), 0.5 * s2, 2.0 * s2};
        const double a = ep.mean - 5.0 * s;
        const double b = ep.mean + 5.0 * s;
        const double upper = simpson([&](double x) { return envelope_density(x, ep).upper; }, a, b, 2000);
        const double lower = simpson([&](double x) { return envelope_density(x, ep).lower; }, a, b, 2000);
        const double truncated = std::erfc(5.0 / std::sqrt(2.0));
        CHECK(upper >= 1.0 - truncated);
        CHECK(lower <= 1.0 + 1e-9);
    }
}

TEST_CASE("tail bounds") {
    CHECK(tail_bound(1.0, 0.0, 1.0, TailSide::upper) == doctest::Approx(0.606531).epsilon(1e-6));
    CHECK(tail_bound(0.7, 0.7, 2.0, TailSide::upper) == 1.0);
    CHECK(tail_bound(0.5, -0.5, 2.0, TailSide::lower) == 1.0);
    CHECK(tail_bound(1.0, 0.2, 1.0, TailSide::lower) == doctest::Approx(std::exp(-0.72)));
    double prev = 1.0;
    for (double x = 0.6; x < 5.0; x += 0.2) {
        const double v = tail_bound(x, 0.5, 1.0, TailSide::upper);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(tail_bound(0.0, 0.0, 1.0, TailSide::upper), ArgumentError);
}

TEST_CASE("envelope CSV") {
    const std::string csv = envelope_csv({0.0, 1.0}, EnvelopeParams{});
    CHECK(csv.rfind("x,lower,upper\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
