// SPDX-License-Identifier: Apache-2.0
#include "pde/lower_bounds.hpp"

#include "common/error.hpp"
#include "common/format.hpp"
#include "pde/linear_derivative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbsde {
namespace {

constexpr double kGridEpsilon = 1e-8;

double curve_at(const std::vector<double>& tau, const std::vector<double>& values, double T, double t) {
    const double s = std::clamp(T - t, 0.0, tau.back());
    const auto it = std::upper_bound(tau.begin(), tau.end(), s);
    if (it == tau.end()) return values.back();
    const std::size_t i = static_cast<std::size_t>(it - tau.begin());
    if (i == 0) return values.front();
    const double w = (s - tau[i - 1]) / (tau[i] - tau[i - 1]);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

}  // namespace

double comparison_curve(double G, double C, double tau) noexcept {
    if (C <= 0.0) return G * tau;
    return G / C * -std::expm1(-C * tau);
}

double LowerBoundCurves::m(double t, bool theoretical) const {
    return curve_at(tau, theoretical ? m_th : m_emp, tau.back(), t);
}

double LowerBoundCurves::rho(double t, bool theoretical) const {
    if (!has_rho) throw ArgumentError("no rho curve was built");
    return curve_at(tau, theoretical ? rho_th : rho_emp, tau.back(), t);
}

std::string LowerBoundCurves::to_csv() const {
    CsvWriter csv({"tau", "t", "m_emp", "m_th", "rho_emp", "rho_th"});
    const double T = tau.back();
    for (std::size_t i = 0; i < tau.size(); ++i) {
        csv.cell(tau[i]).cell(T - tau[i]).cell(m_emp[i]).cell(m_th[i]);
        if (has_rho) {
            csv.cell(rho_emp[i]).cell(rho_th[i]);
        } else {
            csv.cell(std::string_view("")).cell(std::string_view(""));
        }
        csv.end_row();
    }
    return csv.str();
}

WCoefficient w_coefficient(const CoefficientSet& cs) {
    const Expr V = Expr::variable(Var::p);
    const Expr& s = cs.expr(Coef::sigma);
    const Expr sV = s * V;
    auto sub = [&](const Expr& e) { return substitute(e, Var::p, sV); };
    auto d = [&](Coef c, Var a) { return sub(cs.d(c, a).source()); };

    const Expr S = cs.d(Coef::sigma, Var::x).source() + cs.d(Coef::sigma, Var::u).source() * V;
    const Expr f = sub(cs.expr(Coef::f));
    const Expr b = s * S + d(Coef::f, Var::p) * s * V + d(Coef::g, Var::p) * s + f;
    const Expr c = d(Coef::f, Var::x) + d(Coef::g, Var::u) + d(Coef::g, Var::p) * S + d(Coef::f, Var::u) * V +
                   d(Coef::f, Var::p) * S * V;
    const Expr gxV = s * sub(cs.d(Coef::g, Var::x, Var::p).source());

    WCoefficient out;
    out.P0 = diff(b, Var::x) + diff(b, Var::u) * V + c + diff(c, Var::p) * V + gxV;
    out.P1 = diff(b, Var::p);
    return out;
}

LowerBoundCurves lower_bound_curves(const PdeSolution& sol, const CoefficientSet& cs,
                                    const AssumptionReport& report, double x_lo, double x_hi) {
    if (!sol.has_derivatives()) throw ArgumentError("solution has no derivative fields");
    if (report.mode == CheckMode::x_only || !report.dg_inf) {
        throw RefusedError("lower-bound curves need an assumption report in Y or Z mode");
    }
    const Grid& grid = sol.grid();
    const auto [j0, j1] = sol.trusted_nodes(x_lo, x_hi);

    LowerBoundCurves lb;
    lb.sign = report.sign;
    if (lb.sign == SignMode::none) {
        double h1_lo = std::numeric_limits<double>::infinity();
        double h1_hi = -h1_lo;
        for (int j = j0; j <= j1; ++j) {
            h1_lo = std::min(h1_lo, cs.h_prime(grid.x(j)));
            h1_hi = std::max(h1_hi, cs.h_prime(grid.x(j)));
        }
        if (h1_lo >= 0.0) {
            lb.sign = SignMode::increasing;
        } else if (h1_hi <= 0.0 && report.dg_sup) {
            lb.sign = SignMode::decreasing;
        } else {
            throw RefusedError("sign mode undetermined: (A5) fails and h' changes sign on the window");
        }
    }
    const double sgn = lb.sign == SignMode::increasing ? 1.0 : -1.0;
    lb.G = lb.sign == SignMode::increasing ? *report.dg_inf : -*report.dg_sup;

    const bool want_rho = report.mode == CheckMode::z;
    const WCoefficient P = want_rho ? w_coefficient(cs) : WCoefficient{};
    const CompiledExpr P0(P.P0);
    const CompiledExpr P1(P.P1);

    const int K = grid.K;
    double min_ux = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= K; ++k) {
        const double tau = k * grid.dt();
        const double t = grid.T - tau;
        double m = std::numeric_limits<double>::infinity();
        double r = m;
        for (int j = j0; j <= j1; ++j) {
            const double x = grid.x(j);
            const double u = sol.theta(k, j);
            const double ux = sol.theta_x(k, j);
            const double uxx = sol.theta_xx(k, j);
            m = std::min(m, sgn * ux);
            r = std::min(r, uxx);
            min_ux = std::min(min_ux, ux);
            lb.C = std::max(lb.C, std::abs(linear_coefficients(cs, t, x, u, ux).c));
            if (want_rho) {
                const Point pt{t, x, u, ux};
                lb.C2 = std::max(lb.C2, std::abs(P0(pt) + P1(pt) * uxx));
            }
        }
        lb.tau.push_back(tau);
        lb.m_emp.push_back(m);
        if (want_rho) lb.rho_emp.push_back(r);
    }

    if (lb.G <= 0.0) {
        lb.m_degenerate = true;
        lb.diagnostics.push_back("inf of the sign-folded d_x g is " + format_double(lb.G) +
                                 " <= 0: theoretical m is identically 0 and the Y envelopes degenerate");
    }
    for (double tau : lb.tau) lb.m_th.push_back(lb.m_degenerate ? 0.0 : comparison_curve(lb.G, lb.C, tau));

    if (want_rho) {
        lb.has_rho = true;
        lb.G2 = report.dxxg_inf.value_or(0.0);
        if (min_ux < -kGridEpsilon) {
            lb.rho_degenerate = true;
            lb.diagnostics.push_back("u_x takes the negative value " + format_double(min_ux) +
                                     " on the window: theoretical rho is not available");
        } else if (lb.G2 <= 0.0) {
            lb.rho_degenerate = true;
            lb.diagnostics.push_back("inf d_xx g is " + format_double(lb.G2) +
                                     " <= 0: theoretical rho is identically 0 and the Z envelopes degenerate");
        }
        for (double tau : lb.tau) {
            lb.rho_th.push_back(lb.rho_degenerate ? 0.0 : comparison_curve(lb.G2, lb.C2, tau));
        }
    }

    for (std::size_t i = 0; i < lb.tau.size(); ++i) {
        if (lb.m_emp[i] < lb.m_th[i] - kGridEpsilon) {
            lb.diagnostics.push_back("empirical m below theoretical m at tau = " + format_double(lb.tau[i]));
            break;
        }
    }
    if (lb.has_rho) {
        for (std::size_t i = 0; i < lb.tau.size(); ++i) {
            if (lb.rho_emp[i] < lb.rho_th[i] - kGridEpsilon) {
                lb.diagnostics.push_back("empirical rho below theoretical rho at tau = " + format_double(lb.tau[i]));
                break;
            }
        }
    }
    return lb;
}

}  // namespace fbsde
