// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scalar kernels shared by tree evaluation, compiled evaluation and constant
// folding. On a domain violation `err` is set and the return value is unused.

#include "coeffs/expr.hpp"

#include <cmath>
#include <string_view>

namespace fbsde {

Expr make_binary(Expr::Kind kind, Expr a, Expr b);
Expr make_negate(Expr a);
Expr make_raw_call(Func f, Expr arg);

namespace detail {

inline double apply_call(Func f, double a, std::string_view& err) noexcept {
    switch (f) {
        case Func::exp: return std::exp(a);
        case Func::log:
            if (!(a > 0.0)) {
                err = "log of non-positive argument";
                return 0.0;
            }
            return std::log(a);
        case Func::sin: return std::sin(a);
        case Func::cos: return std::cos(a);
        case Func::tanh: return std::tanh(a);
        case Func::atan: return std::atan(a);
        case Func::sqrt:
            if (a < 0.0) {
                err = "sqrt of negative argument";
                return 0.0;
            }
            return std::sqrt(a);
        case Func::abs: return std::fabs(a);
        case Func::sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
    }
    return 0.0;
}

inline double apply_binary(Expr::Kind kind, double a, double b, std::string_view& err) noexcept {
    switch (kind) {
        case Expr::Kind::add: return a + b;
        case Expr::Kind::sub: return a - b;
        case Expr::Kind::mul: return a * b;
        case Expr::Kind::div:
            if (b == 0.0) {
                err = "division by zero";
                return 0.0;
            }
            return a / b;
        case Expr::Kind::pow:
            if (a == 0.0 && b < 0.0) {
                err = "division by zero (zero base, negative exponent)";
                return 0.0;
            }
            if (a < 0.0 && b != std::nearbyint(b)) {
                err = "negative base with non-integer exponent";
                return 0.0;
            }
            if (b == 2.0) return a * a;
            return std::pow(a, b);
        default: return 0.0;
    }
}

}  // namespace detail
}  // namespace fbsde
