// SPDX-License-Identifier: Apache-2.0
#include "sde/driving.hpp"

#include "assumptions/region.hpp"
#include "common/error.hpp"
#include "common/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbsde {

DrivingCoefficients DrivingCoefficients::coupled(std::shared_ptr<const CoefficientSet> cs,
                                                 std::shared_ptr<const PdeSolution> sol,
                                                 const DrivingOptions& opt) {
    if (!cs || !sol) throw ArgumentError("coupled driving coefficients need coefficients and a solution");
    if (!sol->has_derivatives()) throw ArgumentError("solution has no derivative fields");
    DrivingCoefficients dc;
    dc.cs_ = std::move(cs);
    dc.sol_ = std::move(sol);
    dc.opt_ = opt;
    dc.T_ = dc.sol_->grid().T;
    dc.domain_lo_ = dc.sol_->grid().x_lo;
    dc.domain_hi_ = dc.sol_->grid().x_hi;
    dc.sample_constants();
    return dc;
}

DrivingCoefficients DrivingCoefficients::direct(const Expr& f_tilde, const Expr& sigma_tilde, double T,
                                                double x_lo, double x_hi, const DrivingOptions& opt) {
    const VarSet tx{Var::t, Var::x};
    if (!f_tilde.free_variables().subset_of(tx) || !sigma_tilde.free_variables().subset_of(tx)) {
        throw ArgumentError("injected driving coefficients may depend on t and x only");
    }
    if (!(T > 0.0) || !(x_hi > x_lo)) throw ArgumentError("invalid driving domain");
    DrivingCoefficients dc;
    dc.direct_ = std::make_shared<const Direct>(Direct{
        CompiledExpr(f_tilde), CompiledExpr(diff(f_tilde, Var::x)), CompiledExpr(sigma_tilde),
        CompiledExpr(diff(sigma_tilde, Var::x)), CompiledExpr(diff(diff(sigma_tilde, Var::x), Var::x)),
        CompiledExpr(diff(sigma_tilde, Var::t))});
    dc.opt_ = opt;
    dc.T_ = T;
    dc.domain_lo_ = x_lo;
    dc.domain_hi_ = x_hi;
    dc.sample_constants();
    return dc;
}

DrivingValues DrivingCoefficients::evaluate(double t, double x, DrivingDetail detail) const {
    DrivingValues v;
    if (direct_) {
        const Point pt{t, x, 0.0, 0.0};
        v.f = direct_->f(pt);
        v.sigma = direct_->sigma(pt);
        if (detail == DrivingDetail::drift_diffusion) return v;
        v.f_x = direct_->f_x(pt);
        v.sigma_x = direct_->sigma_x(pt);
        if (detail == DrivingDetail::first_order) return v;
        v.sigma_xx = direct_->sigma_xx(pt);
        v.sigma_t = direct_->sigma_t(pt);
        return v;
    }

    const CoefficientSet& cs = *cs_;
    const auto st = sol_->locate(t, x);
    v.u = sol_->interpolate(st, PdeSolution::Field::value);
    v.ux = sol_->interpolate(st, PdeSolution::Field::dx);
    Point pt{t, x, v.u, 0.0};
    v.sigma = cs.sigma(pt);
    pt.p = v.sigma * v.ux;
    v.f = cs.f(pt);
    if (detail == DrivingDetail::drift_diffusion) return v;

    v.uxx = sol_->interpolate(st, PdeSolution::Field::dxx);
    const double s_x = cs.d(Coef::sigma, Var::x)(pt);
    const double s_u = cs.d(Coef::sigma, Var::u)(pt);
    v.sigma_x = s_x + s_u * v.ux;
    v.f_x = cs.d(Coef::f, Var::x)(pt) + cs.d(Coef::f, Var::u)(pt) * v.ux +
            cs.d(Coef::f, Var::p)(pt) * (v.sigma_x * v.ux + v.sigma * v.uxx);
    if (detail == DrivingDetail::first_order) return v;

    v.sigma_xx = cs.d(Coef::sigma, Var::x, Var::x)(pt) + 2.0 * cs.d(Coef::sigma, Var::x, Var::u)(pt) * v.ux +
                 cs.d(Coef::sigma, Var::u, Var::u)(pt) * v.ux * v.ux + s_u * v.uxx;
    // u solves u_t + sigma^2 u_xx / 2 + f u_x + g = 0
    const double u_t = -(0.5 * v.sigma * v.sigma * v.uxx + v.f * v.ux + cs.g(pt));
    v.sigma_t = cs.d(Coef::sigma, Var::t)(pt) + s_u * u_t;
    return v;
}

double DrivingCoefficients::psi(const DrivingValues& v) noexcept {
    const double s = v.sigma;
    return 2.0 * v.f * v.sigma_x / (s * s) - (v.f_x + v.f * v.sigma_xx + v.sigma_t) / s -
           0.5 * v.sigma_xx * s;
}

void DrivingCoefficients::sample_constants() {
    std::vector<double> ts;
    std::vector<double> xs;
    if (sol_) {
        const Grid& g = sol_->grid();
        for (int k = 0; k <= g.K; ++k) ts.push_back(g.t(k));
        const auto [j0, j1] = sol_->trusted_nodes(opt_.window_lo, opt_.window_hi);
        for (int j = j0; j <= j1; ++j) xs.push_back(g.x(j));
    } else {
        ts = linspace(0.0, T_, std::max(3, opt_.psi_samples_t));
        xs = linspace(std::max(opt_.window_lo, domain_lo_), std::min(opt_.window_hi, domain_hi_),
                      std::max(3, opt_.psi_samples_x));
    }
    M_psi_ = 0.0;
    sigma_min_ = std::numeric_limits<double>::infinity();
    for (double t : ts) {
        for (double x : xs) {
            const DrivingValues v = evaluate(t, x);
            sigma_min_ = std::min(sigma_min_, v.sigma);
            if (opt_.sigma_floor && !(v.sigma * v.sigma >= opt_.sigma2_floor)) {
                throw NumericalError("sigma~ = " + format_double(v.sigma) + " below floor at t=" + format_double(t) +
                                     ", x=" + format_double(x));
            }
            const double p = std::abs(psi(v));
            M_psi_ = std::isfinite(p) ? std::max(M_psi_, p) : std::numeric_limits<double>::infinity();
        }
    }
}

}  // namespace fbsde
