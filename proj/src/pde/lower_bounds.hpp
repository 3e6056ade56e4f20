// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "assumptions/report.hpp"
#include "coeffs/coefficient_set.hpp"
#include "pde/solution.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fbsde {

/// Lower-bound curves for |u_x| (m) and u_xx (rho), sampled at every solver
/// level on the reversed clock tau = T - t, each in an empirical (grid inf)
/// and a theoretical (comparison construction) variant.
struct LowerBoundCurves {
    SignMode sign = SignMode::none;
    std::vector<double> tau;
    std::vector<double> m_emp;
    std::vector<double> m_th;
    double G = 0.0;  ///< sign-folded inf d_x g
    double C = 0.0;  ///< sup |c| on the solved window
    bool m_degenerate = false;

    bool has_rho = false;
    std::vector<double> rho_emp;
    std::vector<double> rho_th;
    double G2 = 0.0;  ///< inf d_xx g
    double C2 = 0.0;  ///< sup |P| on the solved window
    bool rho_degenerate = false;

    std::vector<std::string> diagnostics;

    /// Curves at physical time t (linear between levels), i.e. the stored value at tau = T - t.
    double m(double t, bool theoretical) const;
    double rho(double t, bool theoretical) const;

    /// CSV with columns tau, t, m_emp, m_th, rho_emp, rho_th.
    std::string to_csv() const;
};

/// (G / C)(1 - exp(-C tau)), or G tau when C = 0.
double comparison_curve(double G, double C, double tau) noexcept;

/// The coefficient P of w = u_xx in the twice-differentiated equation,
/// as P0 + P1 * W with W standing for u_xx; p stands for u_x.
struct WCoefficient {
    Expr P0;
    Expr P1;
};
WCoefficient w_coefficient(const CoefficientSet& cs);

/// Builds the curves. Mode comes from the report: the (A5) alternative when
/// it passed; otherwise the sign of h' on the window (G <= 0 then yields a
/// degenerate m_th = 0). rho is built for reports in Z mode and needs
/// u_x >= 0 on the grid. Throws RefusedError when no sign mode is available.
LowerBoundCurves lower_bound_curves(const PdeSolution& sol, const CoefficientSet& cs,
                                    const AssumptionReport& report, double x_lo, double x_hi);

}  // namespace fbsde
