// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "coeffs/coefficient_set.hpp"
#include "common/error.hpp"
#include "common/philox.hpp"
#include "common/summation.hpp"
#include "pde/quasilinear_solver.hpp"
#include "sde/paths.hpp"

#include <cmath>
#include <memory>

using namespace fbsde;

namespace {

DrivingOptions window(double lo = -4.0, double hi = 4.0) {
    DrivingOptions opt;
    opt.window_lo = lo;
    opt.window_hi = hi;
    return opt;
}

DrivingCoefficients direct(const char* f, const char* s, DrivingOptions opt = window()) {
    return DrivingCoefficients::direct(parse_expr(f), parse_expr(s), 1.0, -10.0, 10.0, opt);
}

DrivingCoefficients coupled(const char* f, const char* s, const char* g, const char* h, int J = 600, int K = 200) {
    auto cs = std::make_shared<const CoefficientSet>(CoefficientSet::parse({f, s, g, h}));
    Grid grid;
    grid.x_lo = -12.0;
    grid.x_hi = 12.0;
    grid.J = J;
    grid.K = K;
    grid.T = 1.0;
    grid.left = grid.right = BoundaryKind::extrapolate;
    auto sol = std::make_shared<const PdeSolution>(solve_quasilinear(*cs, grid));
    return DrivingCoefficients::coupled(cs, sol, window());
}

double variance(std::span<const double> v) {
    const double m = mean_of(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("constant coefficients give zero psi") {
    const auto dc = direct("0", "1");
    CHECK(dc.M_psi() == 0.0);
    CHECK(dc.sigma_min() == 1.0);
    CHECK(dc.psi(0.3, 0.7) == 0.0);
}

TEST_CASE("psi for a linear drift is -a") {
    const auto dc = direct("0.7*x", "1");
    CHECK(dc.psi(0.2, 1.3) == doctest::Approx(-0.7).epsilon(1e-14));
    CHECK(dc.M_psi() == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("Brownian motion moments") {
    const auto dc = direct("0", "1");
    SimulationOptions opt;
    opt.n_paths = 100000;
    opt.n_steps = 16;
    opt.malliavin = false;
    opt.seed = 7;
    const PathSet ps = simulate_paths(dc, 0.0, opt);
    const auto xT = ps.values(Component::X, ps.observation_index(1.0));
    CHECK(std::abs(mean_of(xT)) < 4.0 / std::sqrt(1e5));
    CHECK(std::abs(variance(xT) - 1.0) < 0.05);
    CHECK_FALSE(ps.has_yz);
}

TEST_CASE("deterministic drift without the sigma floor") {
    DrivingOptions o = window();
    o.sigma_floor = false;
    const auto dc = direct("1", "0", o);
    SimulationOptions opt;
    opt.n_paths = 3;
    opt.n_steps = 8;
    const PathSet ps = simulate_paths(dc, 0.5, opt);
    for (std::size_t obs = 0; obs < ps.times.size(); ++obs) {
        for (double x : ps.values(Component::X, obs)) CHECK(x == doctest::Approx(0.5 + ps.times[obs]).epsilon(1e-14));
    }
}

TEST_CASE("sigma floor violation is an error") {
    CHECK_THROWS_AS(direct("1", "0"), NumericalError);
}

TEST_CASE("Ornstein-Uhlenbeck terminal variance") {
    const auto dc = direct("-x", "1");
    SimulationOptions opt;
    opt.n_paths = 100000;
    opt.n_steps = 200;
    opt.malliavin = false;
    const PathSet ps = simulate_paths(dc, 0.0, opt);
    const double exact = 0.5 * (1.0 - std::exp(-2.0));
    CHECK(exact == doctest::Approx(0.432332).epsilon(1e-6));
    // MC standard error of the variance is about sqrt(2/n) * exact; EM bias is O(dt).
    const double tol = 4.0 * std::sqrt(2.0 / 1e5) * exact + 2.0 * ps.dt();
    CHECK(std::abs(variance(ps.values(Component::X, ps.observation_index(1.0))) - exact) < tol);
}

TEST_CASE("first variation matches the linear flow derivative") {
    for (double a : {-1.0, 0.5}) {
        const std::string f = std::to_string(a) + "*x";
        const auto dc = direct(f.c_str(), "1");
        const Path p = simulate_path(dc, 0.3, 1000, 11, 4);
        const double d = malliavin_X(p, dc, 0.25, 0.75, Representation::first_variation);
        CHECK(std::abs(d / std::exp(a * 0.5) - 1.0) < 0.01);
        // The printed psi gives the reciprocal exponent.
        const double psi_form = malliavin_X(p, dc, 0.25, 0.75, Representation::psi_exponential);
        CHECK(psi_form == doctest::Approx(std::exp(-a * 0.5)).epsilon(1e-12));
        CHECK(std::abs(psi_form - d) > 0.1);
    }
}

TEST_CASE("constant sigma gives sigma in both representations") {
    const auto dc = direct("0", "1.7");
    const Path p = simulate_path(dc, 0.0, 100, 3, 0);
    for (auto rep : {Representation::first_variation, Representation::psi_exponential}) {
        CHECK(malliavin_X(p, dc, 0.2, 0.9, rep) == doctest::Approx(1.7).epsilon(1e-14));
        CHECK(malliavin_X(p, dc, 0.6, 0.3, rep) == 0.0);
    }
}

TEST_CASE("off-lattice times are rejected") {
    const auto dc = direct("0", "1");
    const Path p = simulate_path(dc, 0.0, 10, 3, 0);
    CHECK_THROWS_AS(malliavin_X(p, dc, 0.05, 0.5, Representation::first_variation), ArgumentError);
}

TEST_CASE("ensemble and single-path Malliavin values agree") {
    const auto dc = direct("-0.5*x+0.2*sin(t)", "1+0.3*tanh(x)");
    SimulationOptions opt;
    opt.n_paths = 20;
    opt.n_steps = 40;
    opt.seed = 99;
    const PathSet ps = simulate_paths(dc, 0.1, opt);
    for (std::size_t path : {0u, 7u, 19u}) {
        const Path p = simulate_path(dc, 0.1, 40, 99, path);
        CHECK(p.x.back() == ps.values(Component::X, ps.observation_index(1.0))[path]);
        for (std::size_t q = 0; q < ps.pairs.size(); ++q) {
            const auto& mp = ps.pairs[q];
            for (auto rep : {Representation::first_variation, Representation::psi_exponential}) {
                CHECK(ps.malliavin(Component::X, rep, q)[path] ==
                      doctest::Approx(malliavin_X(p, dc, mp.r, mp.t, rep)).epsilon(1e-12));
            }
            CHECK(ps.tolerance(Component::X, q)[path] >= 0.0);
        }
    }
}

TEST_CASE("default pair set") {
    const auto pairs = default_malliavin_pairs(2.0);
    CHECK(pairs.size() == 9);
    for (const auto& [r, t] : pairs) CHECK(r <= t);
}

TEST_CASE("results do not depend on the thread count") {
    const auto dc = direct("-x", "1+0.2*cos(x)");
    SimulationOptions opt;
    opt.n_paths = 257;
    opt.n_steps = 20;
    opt.threads = 1;
    const PathSet a = simulate_paths(dc, 0.0, opt);
    opt.threads = 4;
    const PathSet b = simulate_paths(dc, 0.0, opt);
    CHECK(a.X == b.X);
    CHECK(a.DX[0] == b.DX[0]);
    CHECK(a.DX[1] == b.DX[1]);
    CHECK(a.tolX == b.tolX);
}

TEST_CASE("exited paths are flagged and excluded") {
    const auto dc = DrivingCoefficients::direct(parse_expr("0"), parse_expr("1"), 1.0, -0.5, 0.5, window(-0.5, 0.5));
    SimulationOptions opt;
    opt.n_paths = 1000;
    opt.n_steps = 20;
    opt.malliavin = false;
    const PathSet ps = simulate_paths(dc, 0.0, opt);
    CHECK(ps.exited_count() > 100);
    CHECK(ps.kept(Component::X, 0).size() == 1000 - ps.exited_count());
}

TEST_CASE("linear solution: D Y = D X and D Z = 0") {
    const auto dc = coupled("0", "1", "0", "x");
    const Path p = simulate_path(dc, 0.0, 100, 5, 2);
    const double dx = malliavin_X(p, dc, 0.25, 0.75, Representation::first_variation);
    CHECK(dx == doctest::Approx(1.0).epsilon(1e-10));
    const MalliavinYZ yz = malliavin_YZ(p, dc, 0.25, 0.75);
    CHECK(yz.DY == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(yz.DZ) < 1e-8);
}

TEST_CASE("quadratic solution: D Z = 2 D X") {
    const auto dc = coupled("0", "1", "0", "x^2");
    const Path p = simulate_path(dc, 0.0, 100, 5, 3);
    const MalliavinYZ yz = malliavin_YZ(p, dc, 0.0, 0.5);
    const double dx = malliavin_X(p, dc, 0.0, 0.5, Representation::first_variation);
    CHECK(yz.DZ == doctest::Approx(2.0 * dx).epsilon(1e-6));
}

TEST_CASE("Y is the solution along the path") {
    const auto dc = coupled("0.1*sin(u)", "1+0.3*tanh(u)", "0.2*tanh(x)", "tanh(x)");
    SimulationOptions opt;
    opt.n_paths = 50;
    opt.n_steps = 40;
    const PathSet ps = simulate_paths(dc, 0.2, opt);
    const PdeSolution& sol = *dc.solution();
    for (std::size_t obs = 0; obs < ps.times.size(); ++obs) {
        const auto x = ps.values(Component::X, obs);
        const auto y = ps.values(Component::Y, obs);
        const auto z = ps.values(Component::Z, obs);
        for (std::size_t i = 0; i < ps.n_paths; ++i) {
            const auto v = sol.at(ps.times[obs], x[i]);
            CHECK(y[i] == v.u);
            CHECK(z[i] == doctest::Approx(v.ux * (1.0 + 0.3 * std::tanh(v.u))).epsilon(1e-14));
        }
    }
}

TEST_CASE("chain rule derivatives against finite differences") {
    const auto dc = coupled("0.1*sin(u)+0.2*p", "1+0.3*tanh(u)", "0.2*tanh(x)", "tanh(x)", 1200, 200);
    const double e = 1e-4;
    for (double t : {0.25, 0.5}) {
        for (double x : {-1.03, 0.11, 0.77}) {
            const DrivingValues v = dc.evaluate(t, x);
            const DrivingValues vp = dc.evaluate(t, x + e);
            const DrivingValues vm = dc.evaluate(t, x - e);
            CHECK(std::abs(v.sigma_x - (vp.sigma - vm.sigma) / (2 * e)) < 1e-4);
            CHECK(std::abs(v.f_x - (vp.f - vm.f) / (2 * e)) < 1e-4);
            CHECK(std::abs(v.ux - (vp.u - vm.u) / (2 * e)) < 1e-4);
        }
    }
}

TEST_CASE("D Y over D X is the slope of u") {
    const auto dc = coupled("0.1*sin(u)", "1+0.3*tanh(u)", "0.2*tanh(x)", "tanh(x)", 1200, 200);
    const PdeSolution& sol = *dc.solution();
    const Path p = simulate_path(dc, 0.2, 200, 8, 1);
    const double dx = malliavin_X(p, dc, 0.25, 0.75, Representation::first_variation);
    const MalliavinYZ yz = malliavin_YZ(p, dc, 0.25, 0.75);
    const double x = p.x[150];
    const double e = 1e-4;
    const double slope = (sol.at(0.75, x + e).u - sol.at(0.75, x - e).u) / (2 * e);
    CHECK(std::abs(yz.DY / dx - slope) < 1e-4);
}

TEST_CASE("identical seeds give identical ensembles") {
    const auto dc = direct("-x", "1");
    SimulationOptions opt;
    opt.n_paths = 64;
    opt.n_steps = 20;
    CHECK(simulate_paths(dc, 0.0, opt).X == simulate_paths(dc, 0.0, opt).X);
    opt.seed = 2;
    CHECK(simulate_paths(dc, 0.0, opt).X != simulate_paths(dc, 0.0, SimulationOptions{64, 20}).X);
}
