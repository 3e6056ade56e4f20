// SPDX-License-Identifier: Apache-2.0
#include "coeffs/expr.hpp"

#include "coeffs/expr_ops.hpp"
#include "common/error.hpp"
#include "common/format.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace fbsde {

struct Expr::Node {
    Kind kind = Kind::constant;
    double value = 0.0;
    Var var = Var::t;
    Func func = Func::exp;
    Expr a{nullptr};
    Expr b{nullptr};
};

namespace {

std::shared_ptr<const Expr::Node> make_node(Expr::Node n) {
    return std::make_shared<const Expr::Node>(std::move(n));
}

const std::shared_ptr<const Expr::Node>& zero_node() {
    static const auto zero = std::make_shared<const Expr::Node>();
    return zero;
}

}  // namespace

std::string_view var_name(Var v) noexcept {
    switch (v) {
        case Var::t: return "t";
        case Var::x: return "x";
        case Var::u: return "u";
        case Var::p: return "p";
    }
    return "?";
}

std::string_view func_name(Func f) noexcept {
    switch (f) {
        case Func::exp: return "exp";
        case Func::log: return "log";
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::tanh: return "tanh";
        case Func::atan: return "atan";
        case Func::sqrt: return "sqrt";
        case Func::abs: return "abs";
        case Func::sign: return "sign";
    }
    return "?";
}

Expr::Expr() : node_(zero_node()) {}

Expr Expr::constant(double value) {
    Node n;
    n.kind = Kind::constant;
    n.value = value;
    return Expr(make_node(std::move(n)));
}

Expr Expr::variable(Var v) {
    Node n;
    n.kind = Kind::variable;
    n.var = v;
    return Expr(make_node(std::move(n)));
}

Expr Expr::call(Func f, Expr arg) {
    if (arg.is_constant()) {
        std::string_view err;
        const double r = detail::apply_call(f, arg.value(), err);
        if (err.empty() && std::isfinite(r)) return constant(r);
    }
    Node n;
    n.kind = Kind::call;
    n.func = f;
    n.a = std::move(arg);
    return Expr(make_node(std::move(n)));
}

Expr::Kind Expr::kind() const noexcept { return node_->kind; }
double Expr::value() const noexcept { return node_->value; }
Var Expr::variable_id() const noexcept { return node_->var; }
Func Expr::function() const noexcept { return node_->func; }
const Expr& Expr::operand(std::size_t i) const noexcept { return i == 0 ? node_->a : node_->b; }

VarSet Expr::free_variables() const {
    switch (kind()) {
        case Kind::constant: return {};
        case Kind::variable: return {variable_id()};
        case Kind::negate:
        case Kind::call: return operand(0).free_variables();
        default: return operand(0).free_variables() | operand(1).free_variables();
    }
}

bool Expr::uses(Func f) const {
    switch (kind()) {
        case Kind::constant:
        case Kind::variable: return false;
        case Kind::negate: return operand(0).uses(f);
        case Kind::call: return function() == f || operand(0).uses(f);
        default: return operand(0).uses(f) || operand(1).uses(f);
    }
}

std::size_t Expr::node_count() const {
    switch (kind()) {
        case Kind::constant:
        case Kind::variable: return 1;
        case Kind::negate:
        case Kind::call: return 1 + operand(0).node_count();
        default: return 1 + operand(0).node_count() + operand(1).node_count();
    }
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Expr::Kind::constant: return a.value() == b.value();
        case Expr::Kind::variable: return a.variable_id() == b.variable_id();
        case Expr::Kind::negate: return a.operand(0) == b.operand(0);
        case Expr::Kind::call: return a.function() == b.function() && a.operand(0) == b.operand(0);
        default: return a.operand(0) == b.operand(0) && a.operand(1) == b.operand(1);
    }
}

Expr make_binary(Expr::Kind kind, Expr a, Expr b) {
    Expr::Node n;
    n.kind = kind;
    n.a = std::move(a);
    n.b = std::move(b);
    return Expr(make_node(std::move(n)));
}

Expr make_raw_call(Func f, Expr arg) {
    Expr::Node n;
    n.kind = Expr::Kind::call;
    n.func = f;
    n.a = std::move(arg);
    return Expr(make_node(std::move(n)));
}

Expr make_negate(Expr a) {
    if (a.is_constant()) return Expr::constant(-a.value());
    Expr::Node n;
    n.kind = Expr::Kind::negate;
    n.a = std::move(a);
    return Expr(make_node(std::move(n)));
}

// ---------------------------------------------------------------------------
// Simplifying builders

namespace {

std::optional<double> fold(Expr::Kind kind, double a, double b) {
    std::string_view err;
    const double r = detail::apply_binary(kind, a, b, err);
    if (!err.empty() || !std::isfinite(r)) return std::nullopt;
    return r;
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto r = fold(Expr::Kind::add, a.value(), b.value())) return Expr::constant(*r);
    }
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    return make_binary(Expr::Kind::add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto r = fold(Expr::Kind::sub, a.value(), b.value())) return Expr::constant(*r);
    }
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return -b;
    return make_binary(Expr::Kind::sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto r = fold(Expr::Kind::mul, a.value(), b.value())) return Expr::constant(*r);
    }
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    return make_binary(Expr::Kind::mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto r = fold(Expr::Kind::div, a.value(), b.value())) return Expr::constant(*r);
    }
    if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
    if (b.is_constant(1.0)) return a;
    return make_binary(Expr::Kind::div, a, b);
}

Expr operator-(const Expr& a) {
    if (a.kind() == Expr::Kind::negate) return a.operand(0);
    return make_negate(a);
}

Expr pow(const Expr& base, const Expr& exponent) {
    if (base.is_constant() && exponent.is_constant()) {
        if (auto r = fold(Expr::Kind::pow, base.value(), exponent.value())) return Expr::constant(*r);
    }
    if (exponent.is_constant(1.0)) return base;
    if (exponent.is_constant(0.0)) return Expr::constant(1.0);
    return make_binary(Expr::Kind::pow, base, exponent);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Higher binds tighter. Negative literals print as "(-c)" and count as atoms.
int precedence(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::add:
        case Expr::Kind::sub: return 1;
        case Expr::Kind::mul:
        case Expr::Kind::div: return 2;
        case Expr::Kind::negate: return 3;
        case Expr::Kind::pow: return 4;
        default: return 5;
    }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
    if (wrap) out += '(';
    print(e, out);
    if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case Expr::Kind::constant: {
            const double v = e.value();
            if (v < 0.0) {
                out += "(-";
                out += format_double(-v);
                out += ')';
            } else {
                out += format_double(v);
            }
            return;
        }
        case Expr::Kind::variable: out += var_name(e.variable_id()); return;
        case Expr::Kind::call:
            out += func_name(e.function());
            out += '(';
            print(e.operand(0), out);
            out += ')';
            return;
        case Expr::Kind::negate:
            out += '-';
            print_wrapped(e.operand(0), precedence(e.operand(0)) < 4, out);
            return;
        case Expr::Kind::pow:
            print_wrapped(e.operand(0), precedence(e.operand(0)) < 5, out);
            out += '^';
            print_wrapped(e.operand(1), precedence(e.operand(1)) < 5, out);
            return;
        default: break;
    }
    const int prec = precedence(e);
    const Expr& lhs = e.operand(0);
    const Expr& rhs = e.operand(1);
    const bool wrap_lhs = lhs.kind() == Expr::Kind::negate || precedence(lhs) < prec;
    const bool wrap_rhs = rhs.kind() == Expr::Kind::negate || precedence(rhs) <= prec;
    print_wrapped(lhs, wrap_lhs, out);
    switch (e.kind()) {
        case Expr::Kind::add: out += '+'; break;
        case Expr::Kind::sub: out += '-'; break;
        case Expr::Kind::mul: out += '*'; break;
        default: out += '/'; break;
    }
    print_wrapped(rhs, wrap_rhs, out);
}

}  // namespace

std::string Expr::to_string() const {
    std::string out;
    print(*this, out);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
public:
    Parser(std::string_view text, VarSet allowed) : text_(text), allowed_(allowed) {}

    Expr parse() {
        skip_space();
        if (pos_ == text_.size()) fail("empty expression");
        Expr e = parse_sum();
        skip_space();
        if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& message) const { throw ParseError(pos_ + 1, message); }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of input");
            fail(std::string("expected '") + c + "'");
        }
    }

    Expr parse_sum() {
        Expr e = parse_product();
        for (;;) {
            if (accept('+')) {
                e = make_binary(Expr::Kind::add, e, parse_product());
            } else if (accept('-')) {
                e = make_binary(Expr::Kind::sub, e, parse_product());
            } else {
                return e;
            }
        }
    }

    Expr parse_product() {
        Expr e = parse_unary();
        for (;;) {
            if (accept('*')) {
                e = make_binary(Expr::Kind::mul, e, parse_unary());
            } else if (accept('/')) {
                e = make_binary(Expr::Kind::div, e, parse_unary());
            } else {
                return e;
            }
        }
    }

    Expr parse_unary() {
        if (accept('-')) return make_negate(parse_unary());
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept('^')) return make_binary(Expr::Kind::pow, base, parse_unary());
        return base;
    }

    Expr parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(std::string("unexpected '") + c + "'");
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        auto digit_at = [&](std::size_t i) {
            return i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]));
        };
        while (digit_at(pos_) || (pos_ < text_.size() && text_[pos_] == '.')) ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (digit_at(look)) {
                pos_ = look;
                while (digit_at(pos_)) ++pos_;
            }
        }
        double value = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        const auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc() || res.ptr != last) {
            pos_ = start;
            fail("malformed number '" + std::string(first, last) + "'");
        }
        return Expr::constant(value);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        static constexpr std::array<Func, 9> funcs{Func::exp, Func::log, Func::sin,
                                                   Func::cos, Func::tanh, Func::atan,
                                                   Func::sqrt, Func::abs, Func::sign};
        for (Func f : funcs) {
            if (name == func_name(f)) {
                expect('(');
                Expr arg = parse_sum();
                expect(')');
                return make_raw_call(f, std::move(arg));
            }
        }
        for (Var v : kAllVars) {
            if (name == var_name(v)) {
                if (!allowed_.contains(v)) {
                    pos_ = start;
                    fail("variable '" + std::string(name) + "' is not allowed here");
                }
                return Expr::variable(v);
            }
        }
        pos_ = start;
        fail("undeclared name '" + std::string(name) + "'");
    }

    std::string_view text_;
    VarSet allowed_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, VarSet allowed) { return Parser(text, allowed).parse(); }

// ---------------------------------------------------------------------------
// Evaluation

double eval(const Expr& e, const Point& at) {
    std::string_view err;
    double r = 0.0;
    switch (e.kind()) {
        case Expr::Kind::constant: return e.value();
        case Expr::Kind::variable: return at[e.variable_id()];
        case Expr::Kind::negate: return -eval(e.operand(0), at);
        case Expr::Kind::call: r = detail::apply_call(e.function(), eval(e.operand(0), at), err); break;
        default:
            r = detail::apply_binary(e.kind(), eval(e.operand(0), at), eval(e.operand(1), at), err);
            break;
    }
    if (!err.empty()) throw EvalError(e.to_string(), std::string(err));
    if (!std::isfinite(r)) throw EvalError(e.to_string(), "non-finite result");
    return r;
}

// ---------------------------------------------------------------------------
// Differentiation

Expr diff(const Expr& e, Var v) {
    switch (e.kind()) {
        case Expr::Kind::constant: return Expr::constant(0.0);
        case Expr::Kind::variable: return Expr::constant(e.variable_id() == v ? 1.0 : 0.0);
        case Expr::Kind::negate: return -diff(e.operand(0), v);
        case Expr::Kind::add: return diff(e.operand(0), v) + diff(e.operand(1), v);
        case Expr::Kind::sub: return diff(e.operand(0), v) - diff(e.operand(1), v);
        case Expr::Kind::mul: {
            const Expr& a = e.operand(0);
            const Expr& b = e.operand(1);
            return diff(a, v) * b + a * diff(b, v);
        }
        case Expr::Kind::div: {
            const Expr& a = e.operand(0);
            const Expr& b = e.operand(1);
            const Expr da = diff(a, v);
            const Expr db = diff(b, v);
            if (db.is_constant(0.0)) return da / b;
            return (da * b - a * db) / pow(b, 2.0);
        }
        case Expr::Kind::pow: {
            const Expr& a = e.operand(0);
            const Expr& b = e.operand(1);
            const Expr da = diff(a, v);
            if (!b.depends_on(v)) {
                if (b.is_constant()) return b * pow(a, b.value() - 1.0) * da;
                return b * pow(a, b - 1.0) * da;
            }
            // d(a^b) = a^b * (b' log a + b a'/a)
            return e * (diff(b, v) * Expr::call(Func::log, a) + b * da / a);
        }
        case Expr::Kind::call: break;
    }
    const Expr& a = e.operand(0);
    const Expr da = diff(a, v);
    if (da.is_constant(0.0)) return Expr::constant(0.0);
    switch (e.function()) {
        case Func::exp: return e * da;
        case Func::log: return da / a;
        case Func::sin: return Expr::call(Func::cos, a) * da;
        case Func::cos: return -(Expr::call(Func::sin, a) * da);
        case Func::tanh: return (1.0 - pow(e, 2.0)) * da;
        case Func::atan: return da / (1.0 + pow(a, 2.0));
        case Func::sqrt: return da / (2.0 * e);
        case Func::abs: return Expr::call(Func::sign, a) * da;
        case Func::sign: return Expr::constant(0.0);
    }
    return Expr::constant(0.0);
}

Expr substitute(const Expr& e, Var v, const Expr& replacement) {
    switch (e.kind()) {
        case Expr::Kind::constant: return e;
        case Expr::Kind::variable: return e.variable_id() == v ? replacement : e;
        case Expr::Kind::negate: return -substitute(e.operand(0), v, replacement);
        case Expr::Kind::call: return Expr::call(e.function(), substitute(e.operand(0), v, replacement));
        case Expr::Kind::add: return substitute(e.operand(0), v, replacement) + substitute(e.operand(1), v, replacement);
        case Expr::Kind::sub: return substitute(e.operand(0), v, replacement) - substitute(e.operand(1), v, replacement);
        case Expr::Kind::mul: return substitute(e.operand(0), v, replacement) * substitute(e.operand(1), v, replacement);
        case Expr::Kind::div: return substitute(e.operand(0), v, replacement) / substitute(e.operand(1), v, replacement);
        case Expr::Kind::pow: return pow(substitute(e.operand(0), v, replacement), substitute(e.operand(1), v, replacement));
    }
    return e;
}

}  // namespace fbsde
