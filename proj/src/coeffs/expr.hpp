// SPDX-License-Identifier: Apache-2.0
#pragma once

// Coefficient expressions: a small closed language over the variables
// {t, x, u, p}, real literals, + - * / ^ and the functions
// exp log sin cos tanh atan sqrt abs. Expressions are immutable and may be
// shared freely between threads.
//
// `sign` exists only because it is the derivative of `abs` (sign(0) = 0);
// it is accepted by the parser so that printed derivatives parse back.

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace fbsde {

enum class Var : std::uint8_t { t = 0, x = 1, u = 2, p = 3 };

inline constexpr std::array<Var, 4> kAllVars{Var::t, Var::x, Var::u, Var::p};

std::string_view var_name(Var v) noexcept;

class VarSet {
public:
    constexpr VarSet() = default;
    constexpr VarSet(std::initializer_list<Var> vars) {
        for (Var v : vars) bits_ |= bit(v);
    }
    static constexpr VarSet all() { return {Var::t, Var::x, Var::u, Var::p}; }

    constexpr bool contains(Var v) const noexcept { return (bits_ & bit(v)) != 0; }
    constexpr void insert(Var v) noexcept { bits_ |= bit(v); }
    constexpr bool subset_of(VarSet other) const noexcept { return (bits_ & ~other.bits_) == 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    friend constexpr VarSet operator|(VarSet a, VarSet b) {
        VarSet r;
        r.bits_ = static_cast<std::uint8_t>(a.bits_ | b.bits_);
        return r;
    }
    friend constexpr bool operator==(VarSet, VarSet) = default;

private:
    static constexpr std::uint8_t bit(Var v) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v)); }
    std::uint8_t bits_ = 0;
};

enum class Func : std::uint8_t { exp, log, sin, cos, tanh, atan, sqrt, abs, sign };

std::string_view func_name(Func f) noexcept;

/// Binding of the four coefficient arguments.
struct Point {
    double t = 0.0;
    double x = 0.0;
    double u = 0.0;
    double p = 0.0;

    constexpr double operator[](Var v) const noexcept {
        switch (v) {
            case Var::t: return t;
            case Var::x: return x;
            case Var::u: return u;
            case Var::p: return p;
        }
        return 0.0;
    }
    constexpr double& operator[](Var v) noexcept {
        switch (v) {
            case Var::t: return t;
            case Var::x: return x;
            case Var::u: return u;
            case Var::p: break;
        }
        return p;
    }
};

class Expr {
public:
    enum class Kind : std::uint8_t { constant, variable, negate, add, sub, mul, div, pow, call };

    /// The literal 0.
    Expr();

    static Expr constant(double value);
    static Expr variable(Var v);
    static Expr call(Func f, Expr arg);

    Kind kind() const noexcept;
    double value() const noexcept;
    Var variable_id() const noexcept;
    Func function() const noexcept;
    /// Children: one for negate/call, two for binary operators.
    const Expr& operand(std::size_t i) const noexcept;

    bool is_constant() const noexcept { return kind() == Kind::constant; }
    bool is_constant(double v) const noexcept { return is_constant() && value() == v; }

    VarSet free_variables() const;
    bool depends_on(Var v) const { return free_variables().contains(v); }
    bool uses(Func f) const;
    std::size_t node_count() const;

    /// Text that `parse_expr` maps back to a structurally equal tree.
    std::string to_string() const;

    /// Structural equality.
    friend bool operator==(const Expr& a, const Expr& b);

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    // Empty child slot of a leaf node.
    explicit Expr(std::nullptr_t) {}
    friend Expr make_binary(Kind, Expr, Expr);
    friend Expr make_negate(Expr);
    friend Expr make_raw_call(Func, Expr);

    std::shared_ptr<const Node> node_;
};

// Simplifying constructors: constant folding and neutral elements only.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);

inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }
inline Expr pow(const Expr& base, double exponent) { return pow(base, Expr::constant(exponent)); }

/// Parses `text`; every variable must be in `allowed`. Throws ParseError.
Expr parse_expr(std::string_view text, VarSet allowed = VarSet::all());

/// Tree-walking evaluation. Throws EvalError naming the offending node.
double eval(const Expr& e, const Point& at);

/// Symbolic partial derivative. abs'(z) = sign(z) with sign(0) = 0.
Expr diff(const Expr& e, Var v);

/// Replaces every occurrence of variable `v` by `replacement`.
Expr substitute(const Expr& e, Var v, const Expr& replacement);

}  // namespace fbsde
