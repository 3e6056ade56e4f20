// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coeffs/expr.hpp"

#include <vector>

namespace fbsde {

/// Postfix form of an Expr for hot loops. Same semantics and errors as
/// `eval`; immutable after construction.
class CompiledExpr {
public:
    CompiledExpr() : CompiledExpr(Expr()) {}
    explicit CompiledExpr(const Expr& e);

    double operator()(const Point& at) const;

    const Expr& source() const noexcept { return source_; }
    bool is_constant() const noexcept { return source_.is_constant(); }

private:
    enum class Op : std::uint8_t { constant, variable, negate, binary, call };
    struct Instr {
        Op op;
        Expr::Kind kind;
        Var var;
        Func func;
        double value;
        std::uint32_t node;  // index into nodes_, for error messages
    };

    void emit(const Expr& e);

    Expr source_;
    std::vector<Instr> code_;
    std::vector<Expr> nodes_;
    std::size_t max_depth_ = 0;
};

}  // namespace fbsde
