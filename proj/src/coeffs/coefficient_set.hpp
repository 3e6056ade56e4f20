// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coeffs/compiled_expr.hpp"
#include "coeffs/expr.hpp"

#include <array>
#include <string>

namespace fbsde {

/// The three (t, x, u, p) coefficients of the system; the terminal map h is separate.
enum class Coef : std::uint8_t { f = 0, sigma = 1, g = 2 };

std::string_view coef_name(Coef c) noexcept;

struct CoefficientSource {
    std::string f = "0";
    std::string sigma = "1";
    std::string g = "0";
    std::string h = "x";
};

/// Drift f(t,x,u,p), diffusion sigma(t,x,u), generator g(t,x,u,p) and
/// terminal map h(x), together with every first and second partial
/// derivative of f, sigma, g in {t,x,u,p} and h', h''. Immutable.
class CoefficientSet {
public:
    /// Parses the four strings; sigma may not mention p and h may only mention x.
    /// Throws ParseError with the coefficient name in the message.
    static CoefficientSet parse(const CoefficientSource& src);

    CoefficientSet(Expr f, Expr sigma, Expr g, Expr h);

    const Expr& expr(Coef c) const noexcept { return table_[index(c)][0].source(); }
    const Expr& h_expr() const noexcept { return h_[0].source(); }

    double operator()(Coef c, const Point& at) const { return table_[index(c)][0](at); }
    double f(const Point& at) const { return (*this)(Coef::f, at); }
    double sigma(const Point& at) const { return (*this)(Coef::sigma, at); }
    double g(const Point& at) const { return (*this)(Coef::g, at); }

    double h(double x) const { return h_[0](Point{0.0, x, 0.0, 0.0}); }
    double h_prime(double x) const { return h_[1](Point{0.0, x, 0.0, 0.0}); }
    double h_second(double x) const { return h_[2](Point{0.0, x, 0.0, 0.0}); }

    /// First partial derivative.
    const CompiledExpr& d(Coef c, Var a) const noexcept { return table_[index(c)][1 + index(a)]; }
    /// Second partial derivative (symmetric in a, b).
    const CompiledExpr& d(Coef c, Var a, Var b) const noexcept {
        return table_[index(c)][5 + pair_index(a, b)];
    }
    const CompiledExpr& h_derivative(int order) const noexcept { return h_[order]; }

    /// True when any coefficient uses abs (not twice differentiable at 0).
    bool uses_abs() const;

private:
    static constexpr std::size_t index(Coef c) noexcept { return static_cast<std::size_t>(c); }
    static constexpr std::size_t index(Var v) noexcept { return static_cast<std::size_t>(v); }
    static std::size_t pair_index(Var a, Var b) noexcept;

    // Per coefficient: value, 4 first partials, 10 second partials.
    std::array<std::array<CompiledExpr, 15>, 3> table_;
    std::array<CompiledExpr, 3> h_;
};

}  // namespace fbsde
