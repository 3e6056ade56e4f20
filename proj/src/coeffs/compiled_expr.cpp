// SPDX-License-Identifier: Apache-2.0
#include "coeffs/compiled_expr.hpp"

#include "coeffs/expr_ops.hpp"
#include "common/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fbsde {

namespace {
constexpr std::size_t kStackLimit = 64;
}

CompiledExpr::CompiledExpr(const Expr& e) : source_(e) {
    emit(e);
    std::size_t depth = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::constant:
            case Op::variable: ++depth; break;
            case Op::binary: --depth; break;
            default: break;
        }
        max_depth_ = std::max(max_depth_, depth);
    }
}

void CompiledExpr::emit(const Expr& e) {
    Instr in{Op::constant, e.kind(), Var::t, Func::exp, 0.0, 0};
    switch (e.kind()) {
        case Expr::Kind::constant:
            in.value = e.value();
            code_.push_back(in);
            return;
        case Expr::Kind::variable:
            in.op = Op::variable;
            in.var = e.variable_id();
            code_.push_back(in);
            return;
        case Expr::Kind::negate:
            emit(e.operand(0));
            in.op = Op::negate;
            break;
        case Expr::Kind::call:
            emit(e.operand(0));
            in.op = Op::call;
            in.func = e.function();
            break;
        default:
            emit(e.operand(0));
            emit(e.operand(1));
            in.op = Op::binary;
            break;
    }
    in.node = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(e);
    code_.push_back(in);
}

double CompiledExpr::operator()(const Point& at) const {
    if (max_depth_ > kStackLimit) return eval(source_, at);
    std::array<double, kStackLimit> stack;
    std::size_t top = 0;
    std::string_view err;
    for (const Instr& in : code_) {
        double r;
        switch (in.op) {
            case Op::constant: stack[top++] = in.value; continue;
            case Op::variable: stack[top++] = at[in.var]; continue;
            case Op::negate: stack[top - 1] = -stack[top - 1]; continue;
            case Op::call: r = detail::apply_call(in.func, stack[top - 1], err); break;
            case Op::binary:
                --top;
                r = detail::apply_binary(in.kind, stack[top - 1], stack[top], err);
                break;
        }
        if (!err.empty()) throw EvalError(nodes_[in.node].to_string(), std::string(err));
        if (!std::isfinite(r)) throw EvalError(nodes_[in.node].to_string(), "non-finite result");
        stack[top - 1] = r;
    }
    return stack[0];
}

}  // namespace fbsde
