// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coeffs/coefficient_set.hpp"
#include "pde/grid.hpp"
#include "pde/solution.hpp"

namespace fbsde {

struct NewtonOptions {
    double tolerance = 1e-10;  ///< sup-norm of the Newton update
    int max_iterations = 25;
    double sigma2_floor = 1e-12;
};

/// Marches theta_tau = 1/2 sigma^2 theta_xx + f theta_x + g, theta(0) = h,
/// p = sigma theta_x, from reversed time 0 to T with the theta-scheme of
/// `grid.omega`. Each stage is solved by damped Newton on the tridiagonal
/// Jacobian. The returned solution has its derivative fields filled.
///
/// Throws NumericalError on Newton failure or when sigma^2 drops below the floor.
PdeSolution solve_quasilinear(const CoefficientSet& cs, const Grid& grid,
                              const NewtonOptions& options = {});

/// Fills theta_x and theta_xx: fourth-order central differences in the
/// interior, second-order next to the edges, one-sided second-order at the
/// edges. The outer PdeSolution::kEdgeBand nodes per side are marked
/// low-confidence.
PdeSolution derivative_fields(PdeSolution sol);

}  // namespace fbsde
