// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "coeffs/coefficient_set.hpp"
#include "coeffs/compiled_expr.hpp"
#include "coeffs/expr.hpp"
#include "common/error.hpp"
#include "support/random_expr.hpp"

#include <cmath>

using namespace fbsde;

namespace {

double central_difference(const Expr& e, Var v, Point at, double step) {
    Point lo = at;
    Point hi = at;
    lo[v] -= step;
    hi[v] += step;
    return (eval(e, hi) - eval(e, lo)) / (2.0 * step);
}

Expr X() { return Expr::variable(Var::x); }
Expr U() { return Expr::variable(Var::u); }
Expr P() { return Expr::variable(Var::p); }

}  // namespace

TEST_CASE("parse builds the expected trees") {
    CHECK(parse_expr("x", {Var::t, Var::x}) == X());
    const Expr e = parse_expr("u*p + sin(x)");
    REQUIRE(e.kind() == Expr::Kind::add);
    CHECK(e.operand(0).kind() == Expr::Kind::mul);
    CHECK(e.operand(0).operand(0) == U());
    CHECK(e.operand(0).operand(1) == P());
    CHECK(e.operand(1) == Expr::call(Func::sin, X()));

    // precedence and associativity
    CHECK(parse_expr("1-x-u") == parse_expr("(1-x)-u"));
    CHECK(parse_expr("x^2^3") == parse_expr("x^(2^3)"));
    CHECK(parse_expr("-x^2").kind() == Expr::Kind::negate);
    CHECK(parse_expr("2*x+3*u/p") == parse_expr("(2*x)+((3*u)/p)"));
    CHECK(parse_expr("1.5e-3*x").operand(0).value() == doctest::Approx(1.5e-3));
}

TEST_CASE("parse errors carry a 1-based column") {
    try {
        parse_expr("2*(t+x");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.column() == 7);
    }
    CHECK_THROWS_AS(parse_expr(""), ParseError);
    CHECK_THROWS_AS(parse_expr("x +"), ParseError);
    CHECK_THROWS_AS(parse_expr("2x"), ParseError);
    CHECK_THROWS_AS(parse_expr("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse_expr("y"), ParseError);
    CHECK_THROWS_AS(parse_expr("u*p", {Var::t, Var::x, Var::u}), ParseError);
}

TEST_CASE("eval") {
    CHECK(eval(parse_expr("x^2"), Point{0, 3, 0, 0}) == 9.0);
    CHECK(eval(parse_expr("exp(0*t)"), Point{7, 0, 0, 0}) == 1.0);
    // tanh(1) from an independent calculator (Python math.tanh)
    CHECK(eval(parse_expr("tanh(x)"), Point{0, 1, 0, 0}) == doctest::Approx(0.7615941559557649).epsilon(1e-15));
    CHECK(eval(parse_expr("abs(x) + sign(x)"), Point{0, -2, 0, 0}) == 1.0);
}

TEST_CASE("eval reports domain errors with the offending node") {
    try {
        eval(parse_expr("1 + log(x)"), Point{0, -1, 0, 0});
        FAIL("expected an eval error");
    } catch (const EvalError& e) {
        CHECK(e.node() == "log(x)");
    }
    CHECK_THROWS_AS(eval(parse_expr("1/x"), Point{}), EvalError);
    CHECK_THROWS_AS(eval(parse_expr("sqrt(x)"), Point{0, -1, 0, 0}), EvalError);
    CHECK_THROWS_AS(eval(parse_expr("x^0.5"), Point{0, -1, 0, 0}), EvalError);
    CHECK_THROWS_AS(eval(parse_expr("exp(x)"), Point{0, 1000, 0, 0}), EvalError);
    CHECK_THROWS_AS(CompiledExpr(parse_expr("1/x"))(Point{}), EvalError);
}

TEST_CASE("diff") {
    CHECK(diff(parse_expr("x^2"), Var::x).to_string() == "2*x");
    CHECK(diff(parse_expr("u*p"), Var::u).to_string() == "p");
    CHECK(diff(parse_expr("x+0*u"), Var::u).is_constant(0.0));
    CHECK(diff(parse_expr("abs(x)"), Var::x) == Expr::call(Func::sign, X()));

    // mixed partial of exp(x u) against a central difference of the x-partial in u
    const Expr e = parse_expr("exp(x*u)");
    const Expr ex = diff(e, Var::x);
    const Expr exu = diff(ex, Var::u);
    const Point at{0, 0.5, 0.2, 0};
    CHECK(std::abs(eval(exu, at) - central_difference(ex, Var::u, at, 1e-5)) < 1e-6);
}

TEST_CASE("simplifying builders only fold constants and neutral elements") {
    CHECK((X() + Expr::constant(0)) == X());
    CHECK((Expr::constant(1) * X()) == X());
    CHECK((Expr::constant(0) * X()).is_constant(0.0));
    CHECK((Expr::constant(2) * Expr::constant(3)).is_constant(6.0));
    CHECK((-(-X())) == X());
    CHECK((X() - X()).kind() == Expr::Kind::sub);  // no algebraic cancellation
    CHECK((Expr::constant(1) / Expr::constant(0)).kind() == Expr::Kind::div);
}

TEST_CASE("property: symbolic derivatives match centered differences") {
    testing::RandomExprGenerator gen(20240611);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Expr e = gen(4);
        const Point at = gen.point();
        for (Var v : kAllVars) {
            double symbolic = 0.0;
            double numeric = 0.0;
            try {
                symbolic = eval(diff(e, v), at);
                numeric = central_difference(e, v, at, 1e-5);
            } catch (const EvalError&) {
                continue;
            }
            INFO(e.to_string(), " d/", var_name(v));
            CHECK(std::abs(symbolic - numeric) <= 1e-4 * (1.0 + std::abs(symbolic)));
            ++checked;
        }
    }
    CHECK(checked > 3500);
}

TEST_CASE("property: print then parse is the identity") {
    testing::RandomExprGenerator gen(77);
    for (int trial = 0; trial < 500; ++trial) {
        const Expr e = gen(5);
        const Expr back = parse_expr(e.to_string());
        INFO(e.to_string());
        CHECK(back == e);
        const Expr d = diff(e, Var::x);
        CHECK(parse_expr(d.to_string()) == d);
    }
    const Expr tricky = -(X() - U()) * pow(-X(), -2.0) / (Expr::constant(-1.5) - P());
    CHECK(parse_expr(tricky.to_string()) == tricky);
}

TEST_CASE("property: compiled evaluation equals tree evaluation") {
    testing::RandomExprGenerator gen(5);
    for (int trial = 0; trial < 300; ++trial) {
        const Expr e = gen(5);
        const CompiledExpr c(e);
        const Point at = gen.point();
        double a = 0.0;
        try {
            a = eval(e, at);
        } catch (const EvalError&) {
            CHECK_THROWS_AS(c(at), EvalError);
            continue;
        }
        CHECK(c(at) == a);
    }
}

TEST_CASE("coefficient set derivative table") {
    const auto cs = CoefficientSet::parse({"x*u + p^2*sin(t)", "2 + tanh(u)*cos(x)", "exp(u*p)/(1+x^2)", "tanh(x)"});
    // sigma is p-free, so every p-partial is the literal 0
    CHECK(cs.d(Coef::sigma, Var::p).source().is_constant(0.0));
    CHECK(cs.d(Coef::sigma, Var::p, Var::x).source().is_constant(0.0));

    testing::RandomExprGenerator pts(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Point at = pts.point();
        for (Coef c : {Coef::f, Coef::sigma, Coef::g}) {
            for (Var a : kAllVars) {
                const double first = cs.d(c, a)(at);
                CHECK(first == doctest::Approx(central_difference(cs.expr(c), a, at, 1e-5)).epsilon(1e-6));
                for (Var b : kAllVars) {
                    const double second = cs.d(c, a, b)(at);
                    CHECK(second == doctest::Approx(central_difference(cs.d(c, a).source(), b, at, 1e-5)).epsilon(1e-6));
                }
            }
        }
        const double x = at.x;
        CHECK(cs.h_prime(x) == doctest::Approx(1.0 / std::cosh(x) / std::cosh(x)));
        CHECK(cs.h_second(x) == doctest::Approx(-2.0 * std::tanh(x) / std::cosh(x) / std::cosh(x)));
    }
}

TEST_CASE("coefficient set rejects p in sigma and non-x variables in h") {
    CHECK_THROWS_AS(CoefficientSet::parse({"0", "1+p", "0", "x"}), ParseError);
    CHECK_THROWS_AS(CoefficientSet::parse({"0", "1", "0", "x+u"}), ParseError);
    CHECK_THROWS_AS(CoefficientSet(Expr(), P(), Expr(), X()), ArgumentError);
    CHECK(CoefficientSet::parse({"0", "1+abs(x)", "0", "x"}).uses_abs());
}
