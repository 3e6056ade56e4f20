// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coeffs/coefficient_set.hpp"
#include "coeffs/compiled_expr.hpp"
#include "pde/solution.hpp"

#include <memory>
#include <optional>

namespace fbsde {

/// Decoupled forward coefficients f~(t,x), sigma~(t,x) and the derivatives the
/// Malliavin representations need, at one (t, x).
struct DrivingValues {
    double f = 0.0;
    double sigma = 0.0;
    double f_x = 0.0;
    double sigma_x = 0.0;
    double sigma_xx = 0.0;
    double sigma_t = 0.0;
    double u = 0.0;
    double ux = 0.0;
    double uxx = 0.0;
};

/// How much of DrivingValues to fill.
enum class DrivingDetail { drift_diffusion, first_order, full };

struct DrivingOptions {
    double window_lo = -1.0;  ///< measurement window for the floor check and M_psi
    double window_hi = 1.0;
    bool sigma_floor = true;
    double sigma2_floor = 1e-12;
    int psi_samples_t = 101;  ///< direct mode sampling grid for M_psi
    int psi_samples_x = 201;
};

/// f~ = f(t,x,u,sigma u_x) and sigma~ = sigma(t,x,u) along the PDE solution u
/// (coupled mode), or injected expressions in (t, x) (direct mode).
class DrivingCoefficients {
public:
    static DrivingCoefficients coupled(std::shared_ptr<const CoefficientSet> cs,
                                       std::shared_ptr<const PdeSolution> sol, const DrivingOptions& opt);
    /// `f_tilde` and `sigma_tilde` may mention t and x only.
    static DrivingCoefficients direct(const Expr& f_tilde, const Expr& sigma_tilde, double T, double x_lo,
                                      double x_hi, const DrivingOptions& opt);

    DrivingValues evaluate(double t, double x, DrivingDetail detail = DrivingDetail::full) const;

    /// 2 f~ sigma~_x / sigma~^2 - (f~_x + f~ sigma~_xx + sigma~_t) / sigma~ - sigma~_xx sigma~ / 2
    static double psi(const DrivingValues& v) noexcept;
    double psi(double t, double x) const { return psi(evaluate(t, x)); }

    /// Sampled sup |psi| over [0, T] x window.
    double M_psi() const noexcept { return M_psi_; }
    /// Sampled inf sigma~ over [0, T] x window.
    double sigma_min() const noexcept { return sigma_min_; }

    bool is_coupled() const noexcept { return sol_ != nullptr; }
    const PdeSolution* solution() const noexcept { return sol_.get(); }
    const CoefficientSet* coefficients() const noexcept { return cs_.get(); }
    double T() const noexcept { return T_; }
    /// Truncated domain; paths leaving it are flagged.
    double domain_lo() const noexcept { return domain_lo_; }
    double domain_hi() const noexcept { return domain_hi_; }
    const DrivingOptions& options() const noexcept { return opt_; }

private:
    DrivingCoefficients() = default;
    void sample_constants();

    std::shared_ptr<const CoefficientSet> cs_;
    std::shared_ptr<const PdeSolution> sol_;
    struct Direct {
        CompiledExpr f, f_x, sigma, sigma_x, sigma_xx, sigma_t;
    };
    std::shared_ptr<const Direct> direct_;
    DrivingOptions opt_;
    double T_ = 1.0;
    double domain_lo_ = 0.0;
    double domain_hi_ = 0.0;
    double M_psi_ = 0.0;
    double sigma_min_ = 0.0;
};

}  // namespace fbsde
