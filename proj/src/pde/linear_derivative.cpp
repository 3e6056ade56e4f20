// SPDX-License-Identifier: Apache-2.0
#include "pde/linear_derivative.hpp"

#include "common/error.hpp"
#include "pde/tridiagonal.hpp"

#include <algorithm>
#include <cmath>

namespace fbsde {

LinearCoefficients linear_coefficients(const CoefficientSet& cs, double t, double x, double u, double ux) {
    Point pt{t, x, u, 0.0};
    const double s = cs.sigma(pt);
    pt.p = s * ux;
    const double S = cs.d(Coef::sigma, Var::x)(pt) + cs.d(Coef::sigma, Var::u)(pt) * ux;
    const double f = cs.f(pt);
    const double f_x = cs.d(Coef::f, Var::x)(pt);
    const double f_u = cs.d(Coef::f, Var::u)(pt);
    const double f_p = cs.d(Coef::f, Var::p)(pt);
    const double g_u = cs.d(Coef::g, Var::u)(pt);
    const double g_p = cs.d(Coef::g, Var::p)(pt);

    LinearCoefficients lc;
    lc.a = 0.5 * s * s;
    lc.b = s * S + f_p * s * ux + g_p * s + f;
    lc.c = f_x + g_u + g_p * S + f_u * ux + f_p * S * ux;
    lc.g_x = cs.d(Coef::g, Var::x)(pt);
    return lc;
}

DerivativeField solve_linear_derivative_pde(const CoefficientSet& cs, const Grid& grid, const PdeSolution& sol) {
    grid.validate();
    const Grid& sg = sol.grid();
    if (sg.J != grid.J || sg.K != grid.K || sg.x_lo != grid.x_lo || sg.x_hi != grid.x_hi || sg.T != grid.T) {
        throw ArgumentError("linear derivative grid does not match the solution grid");
    }
    if (!sol.has_derivatives()) throw ArgumentError("solution has no derivative fields");

    const int J = grid.J;
    const std::size_t nodes = grid.nodes();
    const double dx = grid.dx();
    const double dtau = grid.dt();
    const double omega = grid.omega;
    const int n = J - 1;

    DerivativeField out{grid, std::vector<double>(nodes * grid.levels())};
    for (int j = 0; j <= J; ++j) out.values[j] = cs.h_prime(grid.x(j));

    // Per-node stencil weights of L v = a v_xx + b v_x + c v at one reversed level.
    struct Row {
        double lo, mid, hi, src;
    };
    auto rows_at = [&](int k) {
        const double t = grid.T - k * dtau;
        std::vector<Row> rows(nodes);
        for (int j = 1; j < J; ++j) {
            const LinearCoefficients lc = linear_coefficients(cs, t, grid.x(j), sol.theta(k, j), sol.theta_x(k, j));
            if (!(2.0 * lc.a >= 1e-12)) throw NumericalError("sigma^2 below floor in linear derivative problem");
            rows[j] = {lc.a / (dx * dx) - lc.b / (2.0 * dx), -2.0 * lc.a / (dx * dx) + lc.c,
                       lc.a / (dx * dx) + lc.b / (2.0 * dx), lc.g_x};
        }
        return rows;
    };

    TridiagonalSolver tri;
    std::vector<double> lower(n), diag(n), upper(n), rhs(n), sol_v(n);
    std::vector<Row> rows_old = rows_at(0);
    for (int k = 0; k < grid.K; ++k) {
        const double* v = out.values.data() + static_cast<std::size_t>(k) * nodes;
        double* next = out.values.data() + static_cast<std::size_t>(k + 1) * nodes;
        std::vector<Row> rows_new = rows_at(k + 1);

        const double left_value = sol.theta_x(k + 1, 0);
        const double right_value = sol.theta_x(k + 1, J);
        for (int j = 1; j < J; ++j) {
            const Row& ro = rows_old[j];
            const Row& rn = rows_new[j];
            const int r = j - 1;
            const double explicit_part = ro.lo * v[j - 1] + ro.mid * v[j] + ro.hi * v[j + 1];
            rhs[r] = v[j] + dtau * ((1.0 - omega) * (explicit_part + ro.src) + omega * rn.src);
            lower[r] = -dtau * omega * rn.lo;
            diag[r] = 1.0 - dtau * omega * rn.mid;
            upper[r] = -dtau * omega * rn.hi;
        }
        if (grid.left == BoundaryKind::dirichlet) {
            rhs[0] -= lower[0] * left_value;
        } else {
            diag[0] += 2.0 * lower[0];
            upper[0] -= lower[0];
        }
        if (grid.right == BoundaryKind::dirichlet) {
            rhs[n - 1] -= upper[n - 1] * right_value;
        } else {
            diag[n - 1] += 2.0 * upper[n - 1];
            lower[n - 1] -= upper[n - 1];
        }
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        tri.solve(lower, diag, upper, rhs, sol_v);

        std::copy(sol_v.begin(), sol_v.end(), next + 1);
        next[0] = grid.left == BoundaryKind::dirichlet ? left_value : 2.0 * next[1] - next[2];
        next[J] = grid.right == BoundaryKind::dirichlet ? right_value : 2.0 * next[J - 1] - next[J - 2];
        rows_old = std::move(rows_new);
    }
    return out;
}

}  // namespace fbsde
