// SPDX-License-Identifier: Apache-2.0
#include "pde/quasilinear_solver.hpp"

#include "common/error.hpp"
#include "common/format.hpp"
#include "pde/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fbsde {
namespace {

struct NodeTerms {
    double F = 0.0;
    double d_lower = 0.0;
    double d_center = 0.0;
    double d_upper = 0.0;
};

class StageOperator {
public:
    StageOperator(const CoefficientSet& cs, const Grid& grid, const NewtonOptions& opt)
        : cs_(cs), grid_(grid), opt_(opt), dx_(grid.dx()) {}

    NodeTerms terms(double t, int j, double wm, double w0, double wp, bool jacobian) const {
        const double x = grid_.x(j);
        const double d1 = (wp - wm) / (2.0 * dx_);
        const double d2 = (wp - 2.0 * w0 + wm) / (dx_ * dx_);
        Point pt{t, x, w0, 0.0};
        const double s = cs_.sigma(pt);
        const double A = 0.5 * s * s;
        if (!(s * s >= opt_.sigma2_floor)) {
            throw NumericalError("sigma^2 = " + format_double(s * s) + " below floor at t=" +
                                 format_double(t) + ", x=" + format_double(x) + ", u=" + format_double(w0));
        }
        pt.p = s * d1;
        const double f = cs_.f(pt);
        const double g = cs_.g(pt);
        NodeTerms out;
        out.F = A * d2 + f * d1 + g;
        if (!jacobian) return out;

        const double s_u = cs_.d(Coef::sigma, Var::u)(pt);
        const double f_u = cs_.d(Coef::f, Var::u)(pt);
        const double f_p = cs_.d(Coef::f, Var::p)(pt);
        const double g_u = cs_.d(Coef::g, Var::u)(pt);
        const double g_p = cs_.d(Coef::g, Var::p)(pt);
        out.d_center = s * s_u * d2 - 2.0 * A / (dx_ * dx_) + (f_u + f_p * s_u * d1) * d1 + g_u +
                       g_p * s_u * d1;
        const double first = (f_p * s * d1 + f + g_p * s) / (2.0 * dx_);
        out.d_lower = A / (dx_ * dx_) - first;
        out.d_upper = A / (dx_ * dx_) + first;
        return out;
    }

private:
    const CoefficientSet& cs_;
    const Grid& grid_;
    const NewtonOptions& opt_;
    double dx_;
};

// Sets the boundary entries of `w` from its interior (extrapolate) or from h (Dirichlet).
void apply_boundary(const Grid& grid, const std::vector<double>& h, std::vector<double>& w) {
    const int J = grid.J;
    w[0] = grid.left == BoundaryKind::dirichlet ? h[0] : 2.0 * w[1] - w[2];
    w[J] = grid.right == BoundaryKind::dirichlet ? h[J] : 2.0 * w[J - 1] - w[J - 2];
}

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
}

}  // namespace

PdeSolution solve_quasilinear(const CoefficientSet& cs, const Grid& grid, const NewtonOptions& options) {
    grid.validate();
    const int J = grid.J;
    const int K = grid.K;
    const std::size_t nodes = grid.nodes();
    const double dtau = grid.dt();
    const double omega = grid.omega;
    const int n = J - 1;  // interior unknowns j = 1..J-1

    std::vector<double> h(nodes);
    for (int j = 0; j <= J; ++j) h[j] = cs.h(grid.x(j));

    std::vector<double> theta(nodes * grid.levels());
    std::copy(h.begin(), h.end(), theta.begin());
    std::vector<int> iterations(static_cast<std::size_t>(K), 0);

    StageOperator op(cs, grid, options);
    TridiagonalSolver tri;
    std::vector<double> old_level(nodes), w(nodes), trial(nodes), explicit_part(nodes, 0.0);
    std::vector<double> lower(n), diag(n), upper(n), rhs(n), delta(n), residual(n);

    auto assemble = [&](double t, const std::vector<double>& state, bool jacobian) {
        for (int j = 1; j < J; ++j) {
            const NodeTerms nt = op.terms(t, j, state[j - 1], state[j], state[j + 1], jacobian);
            const int r = j - 1;
            residual[r] = state[j] - old_level[j] - dtau * (omega * nt.F + explicit_part[j]);
            if (!jacobian) continue;
            lower[r] = -dtau * omega * nt.d_lower;
            diag[r] = 1.0 - dtau * omega * nt.d_center;
            upper[r] = -dtau * omega * nt.d_upper;
        }
        if (!jacobian) return;
        // Fold extrapolated boundary values w0 = 2 w1 - w2 into the first/last rows.
        if (grid.left == BoundaryKind::extrapolate) {
            diag[0] += 2.0 * lower[0];
            upper[0] -= lower[0];
        }
        if (grid.right == BoundaryKind::extrapolate) {
            diag[n - 1] += 2.0 * upper[n - 1];
            lower[n - 1] -= upper[n - 1];
        }
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
    };

    for (int k = 0; k < K; ++k) {
        const double t_old = grid.T - k * dtau;
        const double t_new = grid.T - (k + 1) * dtau;
        std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(k * nodes), nodes, old_level.begin());
        if (omega < 1.0) {
            for (int j = 1; j < J; ++j) {
                const NodeTerms nt = op.terms(t_old, j, old_level[j - 1], old_level[j], old_level[j + 1], false);
                explicit_part[j] = (1.0 - omega) * nt.F;
            }
        }

        w = old_level;
        apply_boundary(grid, h, w);
        bool converged = false;
        double res_norm = 0.0;
        int it = 0;
        for (; it < options.max_iterations; ++it) {
            assemble(t_new, w, true);
            res_norm = sup_abs(residual);
            for (int r = 0; r < n; ++r) rhs[r] = -residual[r];
            tri.solve(lower, diag, upper, rhs, delta);

            // Damping: halve the step while the residual grows, up to 1/64.
            double lambda = 1.0;
            for (;;) {
                trial = w;
                for (int r = 0; r < n; ++r) trial[r + 1] += lambda * delta[r];
                apply_boundary(grid, h, trial);
                assemble(t_new, trial, false);
                const double trial_norm = sup_abs(residual);
                if (trial_norm <= res_norm || trial_norm <= 1e-13 * (1.0 + sup_abs(trial)) ||
                    lambda <= 1.0 / 64.0) {
                    res_norm = trial_norm;
                    break;
                }
                lambda *= 0.5;
            }
            w.swap(trial);
            const double step = lambda * sup_abs(delta);
            if (!std::isfinite(step)) break;
            if (step <= options.tolerance) {
                converged = true;
                ++it;
                break;
            }
        }
        if (!converged) {
            throw NumericalError("Newton did not converge at step " + std::to_string(k + 1) +
                                 " (residual " + format_double(res_norm) + ")");
        }
        iterations[static_cast<std::size_t>(k)] = it;
        std::copy(w.begin(), w.end(), theta.begin() + static_cast<std::ptrdiff_t>((k + 1) * nodes));
    }

    return derivative_fields(PdeSolution(grid, std::move(theta), std::move(iterations)));
}

PdeSolution derivative_fields(PdeSolution sol) {
    const Grid& grid = sol.grid();
    const int J = grid.J;
    const std::size_t nodes = grid.nodes();
    const double dx = grid.dx();
    const double dx2 = dx * dx;
    std::vector<double> d1(nodes * grid.levels());
    std::vector<double> d2(d1.size());

    for (int k = 0; k <= grid.K; ++k) {
        const auto w = sol.theta_level(k);
        double* a = d1.data() + static_cast<std::size_t>(k) * nodes;
        double* b = d2.data() + static_cast<std::size_t>(k) * nodes;
        for (int j = 2; j <= J - 2; ++j) {
            a[j] = (-w[j + 2] + 8.0 * w[j + 1] - 8.0 * w[j - 1] + w[j - 2]) / (12.0 * dx);
            b[j] = (-w[j + 2] + 16.0 * w[j + 1] - 30.0 * w[j] + 16.0 * w[j - 1] - w[j - 2]) / (12.0 * dx2);
        }
        for (int j : {1, J - 1}) {
            a[j] = (w[j + 1] - w[j - 1]) / (2.0 * dx);
            b[j] = (w[j + 1] - 2.0 * w[j] + w[j - 1]) / dx2;
        }
        a[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dx);
        b[0] = (2.0 * w[0] - 5.0 * w[1] + 4.0 * w[2] - w[3]) / dx2;
        a[J] = (3.0 * w[J] - 4.0 * w[J - 1] + w[J - 2]) / (2.0 * dx);
        b[J] = (2.0 * w[J] - 5.0 * w[J - 1] + 4.0 * w[J - 2] - w[J - 3]) / dx2;
    }

    std::vector<unsigned char> low(nodes, 0);
    for (int j = 0; j <= J; ++j) {
        low[j] = (j < PdeSolution::kEdgeBand || j > J - PdeSolution::kEdgeBand) ? 1 : 0;
    }
    sol.set_derivatives(std::move(d1), std::move(d2), std::move(low));
    return sol;
}

}  // namespace fbsde
