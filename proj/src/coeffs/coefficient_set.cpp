// SPDX-License-Identifier: Apache-2.0
#include "coeffs/coefficient_set.hpp"

#include "common/error.hpp"

#include <utility>

namespace fbsde {

std::string_view coef_name(Coef c) noexcept {
    switch (c) {
        case Coef::f: return "f";
        case Coef::sigma: return "sigma";
        case Coef::g: return "g";
    }
    return "?";
}

std::size_t CoefficientSet::pair_index(Var a, Var b) noexcept {
    auto i = index(a);
    auto j = index(b);
    if (i > j) std::swap(i, j);
    // Row-major upper triangle of a 4x4 matrix.
    static constexpr std::size_t offset[4] = {0, 4, 7, 9};
    return offset[i] + (j - i);
}

CoefficientSet CoefficientSet::parse(const CoefficientSource& src) {
    auto one = [](const std::string& name, const std::string& text, VarSet allowed) {
        try {
            return parse_expr(text, allowed);
        } catch (const ParseError& e) {
            throw ParseError(e.column(), "in coefficient " + name + ": " + e.message());
        }
    };
    return CoefficientSet(one("f", src.f, VarSet::all()),
                          one("sigma", src.sigma, {Var::t, Var::x, Var::u}),
                          one("g", src.g, VarSet::all()),
                          one("h", src.h, {Var::x}));
}

CoefficientSet::CoefficientSet(Expr f, Expr sigma, Expr g, Expr h) {
    if (sigma.depends_on(Var::p)) throw ArgumentError("sigma must not depend on p");
    if (!h.free_variables().subset_of({Var::x})) throw ArgumentError("h may only depend on x");
    const std::array<Expr, 3> exprs{std::move(f), std::move(sigma), std::move(g)};
    for (std::size_t c = 0; c < 3; ++c) {
        auto& row = table_[c];
        row[0] = CompiledExpr(exprs[c]);
        for (Var a : kAllVars) {
            const Expr da = diff(exprs[c], a);
            row[1 + index(a)] = CompiledExpr(da);
            for (Var b : kAllVars) {
                if (index(b) < index(a)) continue;
                row[5 + pair_index(a, b)] = CompiledExpr(diff(da, b));
            }
        }
    }
    const Expr h1 = diff(h, Var::x);
    h_ = {CompiledExpr(h), CompiledExpr(h1), CompiledExpr(diff(h1, Var::x))};
}

bool CoefficientSet::uses_abs() const {
    for (const auto& row : table_) {
        if (row[0].source().uses(Func::abs)) return true;
    }
    return h_[0].source().uses(Func::abs);
}

}  // namespace fbsde
