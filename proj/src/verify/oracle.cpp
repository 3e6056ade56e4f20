// SPDX-License-Identifier: Apache-2.0
#include "verify/oracle.hpp"

#include "common/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace fbsde {
namespace {

bool is_number(const Expr& e) { return e.free_variables().empty(); }

double value_of(const Expr& e) { return eval(e, Point{}); }

// (e^{k s} - 1) / k, continuous at k = 0.
double expm1_ratio(double k, double s) { return k == 0.0 ? s : std::expm1(k * s) / k; }

}  // namespace

double GaussianLaw::pdf(double x) const {
    if (degenerate()) return x == mean ? std::numeric_limits<double>::infinity() : 0.0;
    return std::exp(-0.5 * (x - mean) * (x - mean) / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

double GaussianLaw::survival(double x) const {
    if (degenerate()) return x <= mean ? 1.0 : 0.0;
    return 0.5 * std::erfc((x - mean) / std::sqrt(2.0 * variance));
}

bool GaussianOracle::solvable(const CoefficientSet& cs) {
    const Expr& f = cs.expr(Coef::f);
    if (f.depends_on(Var::t) || f.depends_on(Var::u) || f.depends_on(Var::p)) return false;
    if (!is_number(cs.d(Coef::f, Var::x).source())) return false;
    if (!is_number(cs.expr(Coef::sigma)) || !(value_of(cs.expr(Coef::sigma)) > 0.0)) return false;
    if (!cs.expr(Coef::g).is_constant(0.0)) return false;
    const Expr& h2 = cs.h_derivative(2).source();
    return is_number(h2) && value_of(h2) == 0.0;
}

GaussianOracle::GaussianOracle(const CoefficientSet& cs, double x0, double T) : x0_(x0), T_(T) {
    if (!solvable(cs)) {
        throw RefusedError("no closed-form law: needs f = a x + b, constant sigma > 0, g = 0 and affine h");
    }
    a_ = value_of(cs.d(Coef::f, Var::x).source());
    b_ = cs.f(Point{});
    sigma_ = value_of(cs.expr(Coef::sigma));
    c_ = cs.h_prime(0.0);
    d_ = cs.h(0.0);
}

// u_t + sigma^2 u_xx / 2 + (a x + b) u_x = 0 with u = A x + B gives A' = -a A, B' = -b A.
double GaussianOracle::A(double t) const { return c_ * std::exp(a_ * (T_ - t)); }

double GaussianOracle::B(double t) const { return d_ + b_ * c_ * expm1_ratio(a_, T_ - t); }

double GaussianOracle::u(double t, double x) const { return A(t) * x + B(t); }

GaussianLaw GaussianOracle::law(Component c, double t) const {
    const double mean = x0_ * std::exp(a_ * t) + b_ * expm1_ratio(a_, t);
    const double var = sigma_ * sigma_ * expm1_ratio(2.0 * a_, t);
    switch (c) {
        case Component::X: return {mean, var};
        case Component::Y: return {A(t) * mean + B(t), A(t) * A(t) * var};
        case Component::Z: return {A(t) * sigma_, 0.0};
    }
    return {};
}

}  // namespace fbsde
