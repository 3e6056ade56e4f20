// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "assumptions/checks.hpp"
#include "coeffs/coefficient_set.hpp"
#include "common/error.hpp"
#include "pde/linear_derivative.hpp"
#include "pde/lower_bounds.hpp"
#include "pde/quasilinear_solver.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace fbsde;
using fbsde::testing::GaussHermite;

namespace {

CoefficientSet make(const char* f, const char* sigma, const char* g, const char* h) {
    return CoefficientSet::parse({f, sigma, g, h});
}

Grid make_grid(int J, int K, double half = 8.0, double T = 1.0, BoundaryKind bc = BoundaryKind::dirichlet) {
    Grid grid;
    grid.x_lo = -half;
    grid.x_hi = half;
    grid.J = J;
    grid.K = K;
    grid.T = T;
    grid.left = grid.right = bc;
    return grid;
}

struct OracleCase {
    double mu;
    double sigma;
    const char* f;
    const char* s;
    double (*h)(double);
    double (*h_prime)(double);
    const char* h_text;
};

double tanh_h(double x) { return std::tanh(x); }
double tanh_h1(double x) { return 1.0 - std::tanh(x) * std::tanh(x); }
double bump_h(double x) { return std::tanh(x) + 0.5 * std::exp(-x * x); }
double bump_h1(double x) { return tanh_h1(x) - x * std::exp(-x * x); }

// Sup error of u and u_x against the Gaussian convolution over |x| <= 4, all levels.
std::pair<double, double> feynman_kac_error(const OracleCase& oc, int J, int K) {
    static const GaussHermite gh(64);
    const auto cs = make(oc.f, oc.s, "0", oc.h_text);
    const Grid grid = make_grid(J, K);
    const PdeSolution sol = solve_quasilinear(cs, grid);
    double err = 0.0;
    double err_x = 0.0;
    for (int k = 0; k <= grid.K; ++k) {
        const double tau = grid.T - grid.t(k);
        for (int j = 0; j <= grid.J; ++j) {
            const double x = grid.x(j);
            if (std::abs(x) > 4.0) continue;
            const double m = x + oc.mu * tau;
            const double s = oc.sigma * std::sqrt(tau);
            err = std::max(err, std::abs(sol.u(k, j) - gh.expectation(oc.h, m, s)));
            err_x = std::max(err_x, std::abs(sol.ux(k, j) - gh.expectation(oc.h_prime, m, s)));
        }
    }
    return {err, err_x};
}

}  // namespace

TEST_CASE("Gauss-Hermite oracle integrates polynomials exactly") {
    const GaussHermite gh(64);
    CHECK(gh.expectation([](double z) { return z * z; }, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gh.expectation([](double z) { return z * z * z * z; }, 0.0, 2.0) == doctest::Approx(48.0).epsilon(1e-12));
    CHECK(gh.expectation([](double z) { return std::cos(z); }, 0.0, 1.0) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-13));
}

TEST_CASE("linear terminal data is invariant under the heat flow") {
    const auto cs = make("0", "1", "0", "x");
    const PdeSolution sol = solve_quasilinear(cs, make_grid(64, 50));
    double err = 0.0;
    for (int k = 0; k <= sol.grid().K; ++k) {
        for (int j = 0; j <= sol.grid().J; ++j) err = std::max(err, std::abs(sol.u(k, j) - sol.grid().x(j)));
    }
    CHECK(err <= 1e-12);
    for (int k = 0; k <= sol.grid().K; ++k) {
        for (int j = 0; j <= sol.grid().J; ++j) {
            CHECK(sol.ux(k, j) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(std::abs(sol.uxx(k, j)) <= 1e-8);
        }
    }
    CHECK(sol.M() == doctest::Approx(8.0));
    CHECK(sol.M1() == doctest::Approx(1.0));
}

TEST_CASE("constant generator gives u = T - t") {
    const auto cs = make("0", "1", "1", "0");
    const PdeSolution sol = solve_quasilinear(cs, make_grid(40, 37, 5.0, 2.0, BoundaryKind::extrapolate));
    double err = 0.0;
    for (int k = 0; k <= sol.grid().K; ++k) {
        for (int j = 0; j <= sol.grid().J; ++j) {
            err = std::max(err, std::abs(sol.u(k, j) - (sol.grid().T - sol.grid().t(k))));
        }
    }
    CHECK(err <= 1e-10);
}

TEST_CASE("terminal condition and index reversal are exact") {
    const auto cs = make("0.3*u", "1+0.2*tanh(u)", "0.1*p^2", "tanh(x)");
    const PdeSolution sol = solve_quasilinear(cs, make_grid(60, 30));
    const Grid& grid = sol.grid();
    for (int j = 0; j <= grid.J; ++j) CHECK(sol.u(grid.K, j) == cs.h(grid.x(j)));
    for (int k = 0; k <= grid.K; ++k) {
        for (int j = 0; j <= grid.J; ++j) {
            CHECK(sol.theta(k, j) == sol.u(grid.K - k, j));
            CHECK(sol.u(grid.K - (grid.K - k), j) == sol.u(k, j));
        }
    }
    double m = 0.0;
    for (int k = 0; k <= grid.K; ++k) {
        for (int j = 0; j <= grid.J; ++j) m = std::max(m, std::abs(sol.u(k, j)));
    }
    CHECK(sol.M() == m);
    CHECK(std::isfinite(sol.M1()));
    CHECK(sol.newton_iterations().size() == static_cast<std::size_t>(grid.K));
    for (int it : sol.newton_iterations()) CHECK(it <= 6);
}

TEST_CASE("Feynman-Kac convergence is second order") {
    const OracleCase cases[] = {
        {0.5, 1.0, "0.5", "1", tanh_h, tanh_h1, "tanh(x)"},
        {-0.3, 0.8, "-0.3", "0.8", bump_h, bump_h1, "tanh(x)+0.5*exp(-x^2)"},
        {0.0, 1.3, "0", "1.3", bump_h, bump_h1, "tanh(x)+0.5*exp(-x^2)"},
    };
    for (const auto& oc : cases) {
        CAPTURE(oc.h_text);
        CAPTURE(oc.mu);
        const auto e1 = feynman_kac_error(oc, 80, 40);
        const auto e2 = feynman_kac_error(oc, 160, 80);
        const auto e3 = feynman_kac_error(oc, 320, 160);
        CHECK(e1.first / e2.first >= 3.0);
        CHECK(e2.first / e3.first >= 3.0);
        CHECK(std::log2(e2.first / e3.first) >= 1.8);
        // sup error <= C (dx^2 + dt^2) with dx = 0.05, dt = 1/160
        const double h2 = 0.05 * 0.05 + 1.0 / (160.0 * 160.0);
        CHECK(e3.first <= 0.1 * h2);
        // derivative field follows the same order
        CHECK(e2.second / e3.second >= 3.0);
        CHECK(e3.second <= 0.1 * h2);
    }
}

TEST_CASE("quasilinear solve matches the Cole-Hopf transform") {
    // theta_tau = 1/2 theta_xx + 1/2 theta_x^2  =>  exp(theta) solves the heat equation.
    static const GaussHermite gh(64);
    const auto cs = make("0", "1", "0.5*p^2", "tanh(x)");
    const Grid grid = make_grid(320, 160);
    const PdeSolution sol = solve_quasilinear(cs, grid);
    double err = 0.0;
    for (int k = 0; k < grid.K; ++k) {
        const double tau = grid.T - grid.t(k);
        for (int j = 0; j <= grid.J; ++j) {
            const double x = grid.x(j);
            if (std::abs(x) > 4.0) continue;
            const double ref = std::log(gh.expectation([](double y) { return std::exp(std::tanh(y)); }, x, std::sqrt(tau)));
            err = std::max(err, std::abs(sol.u(k, j) - ref));
        }
    }
    CHECK(err <= 0.1 * (grid.dx() * grid.dx() + grid.dt() * grid.dt()));
}

TEST_CASE("maximum principle for non-negative data") {
    const auto cs = make("0.3*u", "1+0.2*tanh(u)", "0.5*exp(-x^2)", "exp(-x^2)");
    const PdeSolution sol = solve_quasilinear(cs, make_grid(120, 80, 6.0));
    double lo = 0.0;
    for (int k = 0; k <= sol.grid().K; ++k) {
        for (int j = 0; j <= sol.grid().J; ++j) lo = std::min(lo, sol.u(k, j));
    }
    CHECK(lo >= -1e-8);
}

TEST_CASE("sigma below floor is reported") {
    const auto cs = make("0", "x", "0", "x");
    CHECK_THROWS_AS(solve_quasilinear(cs, make_grid(40, 10)), NumericalError);
}

TEST_CASE("derivative fields on prescribed fields") {
    const Grid grid = make_grid(40, 10, 3.0, 1.0);
    std::vector<double> theta(grid.nodes() * grid.levels());
    for (int k = 0; k <= grid.K; ++k) {
        for (int j = 0; j <= grid.J; ++j) {
            const double x = grid.x(j);
            theta[k * grid.nodes() + j] = x * x + k * grid.dt();  // u = x^2 + (T - t)
        }
    }
    const PdeSolution sol = derivative_fields(PdeSolution(grid, theta));
    for (int k = 0; k <= grid.K; ++k) {
        for (int j = 0; j <= grid.J; ++j) {
            CHECK(sol.uxx(k, j) == doctest::Approx(2.0).epsilon(1e-10));
            CHECK(sol.ux(k, j) == doctest::Approx(2.0 * grid.x(j)).epsilon(1e-10));
        }
    }
    CHECK(sol.low_confidence(0));
    CHECK(sol.low_confidence(2));
    CHECK_FALSE(sol.low_confidence(3));
    CHECK_FALSE(sol.low_confidence(grid.J - 3));
    CHECK(sol.low_confidence(grid.J - 2));
    // M1 excludes the edge band
    CHECK(sol.M1() == doctest::Approx(2.0 * grid.x(grid.J - 3)));
}

TEST_CASE("interpolation is exact for cubics in x and linear in t") {
    const Grid grid = make_grid(30, 8, 2.0, 1.0);
    std::vector<double> theta(grid.nodes() * grid.levels());
    auto field = [](double t, double x) { return x * x * x - 2.0 * x + 3.0 * t * x + t; };
    for (int k = 0; k <= grid.K; ++k) {
        for (int j = 0; j <= grid.J; ++j) theta[k * grid.nodes() + j] = field(grid.T - k * grid.dt(), grid.x(j));
    }
    const PdeSolution sol = derivative_fields(PdeSolution(grid, theta));
    for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        for (double x : {-2.0, -1.93, -0.4, 0.0, 1.234, 1.99, 2.0}) {
            CHECK(sol.at(t, x).u == doctest::Approx(field(t, x)).epsilon(1e-12));
        }
    }
    const auto outside = sol.locate(0.5, 5.0);
    CHECK(outside.outside);
    CHECK(sol.interpolate(outside, PdeSolution::Field::value) == doctest::Approx(field(0.5, 2.0)));
}

TEST_CASE("linear derivative problem") {
    SUBCASE("heat case stays at one") {
        const auto cs = make("0", "1", "0", "x");
        const Grid grid = make_grid(40, 20);
        const DerivativeField v = solve_linear_derivative_pde(cs, grid, solve_quasilinear(cs, grid));
        for (double e : v.values) CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("unit x-forcing gives v = tau") {
        const auto cs = make("0", "1", "x", "0");
        const Grid grid = make_grid(40, 20, 4.0, 1.0, BoundaryKind::extrapolate);
        const DerivativeField v = solve_linear_derivative_pde(cs, grid, solve_quasilinear(cs, grid));
        for (int k = 0; k <= grid.K; ++k) {
            for (int j = 0; j <= grid.J; ++j) CHECK(v(k, j) == doctest::Approx(k * grid.dt()).epsilon(1e-8));
        }
    }
    SUBCASE("consistency with the differentiated solution") {
        const auto cs = make("0.5+0.2*u", "1+0.1*tanh(u)", "0.2*p", "tanh(x)");
        double previous = 0.0;
        for (int J : {80, 160}) {
            const Grid grid = make_grid(J, J / 2);
            const PdeSolution sol = solve_quasilinear(cs, grid);
            const DerivativeField v = solve_linear_derivative_pde(cs, grid, sol);
            double err = 0.0;
            for (int k = 0; k <= grid.K; ++k) {
                for (int j = 0; j <= grid.J; ++j) {
                    if (std::abs(grid.x(j)) > 4.0) continue;
                    err = std::max(err, std::abs(v(k, j) - sol.theta_x(k, j)));
                }
            }
            CAPTURE(J);
            CHECK(err <= 5e-3);
            if (previous > 0.0) CHECK(err < previous);
            previous = err;
        }
    }
}

namespace {

Region window_region(double half, const PdeSolution& sol) {
    Region r;
    r.x_lo = -half;
    r.x_hi = half;
    r.t_hi = sol.grid().T;
    r.u_bound = 1.1 * sol.M();
    r.p_bound = 1.1 * sol.M1();
    return r;
}

}  // namespace

TEST_CASE("comparison curve closed form") {
    CHECK(comparison_curve(1.0, 2.0, 0.5) == doctest::Approx(0.316060).epsilon(1e-6));
    CHECK(comparison_curve(1.0, 2.0, 0.5) == doctest::Approx((1.0 - std::exp(-1.0)) / 2.0).epsilon(1e-15));
    CHECK(comparison_curve(0.7, 0.0, 0.5) == 0.35);
    CHECK(comparison_curve(1.0, 2.0, 0.0) == 0.0);
}

TEST_CASE("coefficient of u_xx in the twice-differentiated equation") {
    const auto P = w_coefficient(make("0.75*p", "1", "0", "x"));
    const Point at{0.2, 0.4, -0.3, 1.7};
    CHECK(eval(P.P0, at) == doctest::Approx(0.0));
    CHECK(eval(P.P1, at) == doctest::Approx(1.5));
    // g = u: c = 1 contributes to P0
    const auto Q = w_coefficient(make("0", "1", "u", "x"));
    CHECK(eval(Q.P0, at) == doctest::Approx(1.0));
    CHECK(eval(Q.P1, at) == doctest::Approx(0.0));
}

TEST_CASE("lower-bound curves") {
    SUBCASE("heat case: m_emp is 1 and theoretical m degenerates") {
        const auto cs = make("0", "1", "0", "x");
        const PdeSolution sol = solve_quasilinear(cs, make_grid(80, 20));
        const auto report = check_all(cs, window_region(3.0, sol), CheckMode::y);
        const auto lb = lower_bound_curves(sol, cs, report, -3.0, 3.0);
        for (double m : lb.m_emp) CHECK(m == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(lb.m_degenerate);
        for (double m : lb.m_th) CHECK(m == 0.0);
        CHECK_FALSE(lb.diagnostics.empty());
    }
    SUBCASE("Y mode with g = 0.5 x") {
        const auto cs = make("0.1*sin(u)", "1", "0.5*x+0.2*tanh(u)", "tanh(x)");
        Grid grid = make_grid(240, 120, 12.0, 1.0, BoundaryKind::extrapolate);
        const PdeSolution sol = solve_quasilinear(cs, grid);
        const auto report = check_all(cs, window_region(4.0, sol), CheckMode::y);
        REQUIRE(report.passed("A5"));
        const auto lb = lower_bound_curves(sol, cs, report, -4.0, 4.0);
        CHECK(lb.sign == SignMode::increasing);
        CHECK(lb.G == doctest::Approx(0.5));
        CHECK(lb.C > 0.0);
        CHECK(lb.m_th.front() == 0.0);
        for (std::size_t i = 0; i < lb.tau.size(); ++i) {
            CHECK(lb.m_th[i] == doctest::Approx(comparison_curve(lb.G, lb.C, lb.tau[i])).epsilon(1e-15));
            CHECK(lb.m_emp[i] >= lb.m_th[i] - 1e-8);
            if (i > 0) CHECK(lb.m_th[i] >= lb.m_th[i - 1]);
        }
        CHECK(lb.diagnostics.empty());
        // physical-time accessor reads the reversed clock
        CHECK(lb.m(grid.T, true) == 0.0);
        CHECK(lb.m(0.0, true) == doctest::Approx(lb.m_th.back()));
    }
    SUBCASE("Z mode rho curves") {
        for (const char* f : {"0", "0.2*p"}) {
            CAPTURE(f);
            const auto cs = make(f, "1", "0.25*x^2+x", "x");
            const Grid grid = make_grid(400, 100, 10.0, 1.0, BoundaryKind::extrapolate);
            const PdeSolution sol = solve_quasilinear(cs, grid);
            const auto report = check_all(cs, window_region(2.0, sol), CheckMode::z);
            REQUIRE(report.passed());
            const auto lb = lower_bound_curves(sol, cs, report, -2.0, 2.0);
            REQUIRE(lb.has_rho);
            CHECK_FALSE(lb.rho_degenerate);
            CHECK(lb.G2 == doctest::Approx(0.5));
            for (std::size_t i = 0; i < lb.tau.size(); ++i) CHECK(lb.rho_emp[i] >= lb.rho_th[i] - 1e-8);
            CHECK(lb.rho_th.back() > 0.0);
        }
    }
    SUBCASE("sign change of h' refuses") {
        const auto cs = make("0", "1", "0", "x^2");
        const PdeSolution sol = solve_quasilinear(cs, make_grid(80, 20, 8.0, 1.0, BoundaryKind::extrapolate));
        const auto report = check_all(cs, window_region(2.0, sol), CheckMode::y);
        CHECK_THROWS_AS(lower_bound_curves(sol, cs, report, -2.0, 2.0), RefusedError);
    }
}
