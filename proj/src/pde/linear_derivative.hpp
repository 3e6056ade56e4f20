// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coeffs/coefficient_set.hpp"
#include "pde/grid.hpp"
#include "pde/solution.hpp"

#include <vector>

namespace fbsde {

/// Solution v of the differentiated linear problem on the reversed clock.
struct DerivativeField {
    Grid grid;
    std::vector<double> values;  ///< level-major, values[k * nodes + j]

    double operator()(int k, int j) const noexcept {
        return values[static_cast<std::size_t>(k) * grid.nodes() + static_cast<std::size_t>(j)];
    }
};

/// Frozen coefficients a, b, c of the differentiated equation at one node,
/// evaluated at (t, x, u, p = sigma u_x) with the given u_x.
struct LinearCoefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double g_x = 0.0;
};

LinearCoefficients linear_coefficients(const CoefficientSet& cs, double t, double x, double u, double ux);

/// Solves v_tau = a v_xx + b v_x + c v + g_x, v(0) = h', with a, b, c frozen on
/// `sol` and the theta-scheme of `grid`. Dirichlet sides take the solved
/// theta_x edge values; extrapolate sides use linear extrapolation.
/// `grid` must match the grid of `sol`.
DerivativeField solve_linear_derivative_pde(const CoefficientSet& cs, const Grid& grid, const PdeSolution& sol);

}  // namespace fbsde
