// SPDX-License-Identifier: Apache-2.0
#include "assumptions/checks.hpp"

#include "common/error.hpp"
#include "common/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fbsde {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(const Point& p) {
    return "(t=" + format_double(p.t) + ", x=" + format_double(p.x) + ", u=" + format_double(p.u) +
           ", p=" + format_double(p.p) + ")";
}

double eval_at(const CompiledExpr& e, const Point& p) {
    try {
        return e(p);
    } catch (const EvalError& err) {
        throw EvalError(err.node(), err.message() + " at sample point " + describe(p));
    }
}

// Calls fn(point) over the tensor grid of the axes in `vars`; other axes are pinned.
template <class F>
void for_each_point(const Region& r, VarSet vars, F&& fn) {
    const std::vector<double> ts = vars.contains(Var::t) ? r.t_samples() : std::vector<double>{r.t_lo};
    const std::vector<double> xs = vars.contains(Var::x) ? r.x_samples() : std::vector<double>{r.x_lo};
    const std::vector<double> us = vars.contains(Var::u) ? r.u_samples() : std::vector<double>{0.0};
    const std::vector<double> ps = vars.contains(Var::p) ? r.p_samples() : std::vector<double>{0.0};
    for (double t : ts) {
        for (double x : xs) {
            for (double u : us) {
                for (double p : ps) fn(Point{t, x, u, p});
            }
        }
    }
}

struct Extremes {
    double lo = kInf;
    double hi = -kInf;
    Point at_lo;
    Point at_hi;
    bool finite = true;
    Point at_nonfinite;

    void add(double v, const Point& p) {
        if (!std::isfinite(v)) {
            if (finite) at_nonfinite = p;
            finite = false;
            return;
        }
        if (v < lo) {
            lo = v;
            at_lo = p;
        }
        if (v > hi) {
            hi = v;
            at_hi = p;
        }
    }
    double sup_abs() const { return finite ? std::max(std::abs(lo), std::abs(hi)) : kInf; }
};

Extremes scan(const CompiledExpr& e, const Region& r, VarSet extra = {}) {
    Extremes ex;
    for_each_point(r, e.source().free_variables() | extra, [&](const Point& p) { ex.add(eval_at(e, p), p); });
    return ex;
}

// h and its derivatives depend on x only.
Extremes scan_h(const CoefficientSet& cs, int order, const Region& r) {
    Extremes ex;
    for (double x : r.x_samples()) {
        const Point p{r.t_lo, x, 0.0, 0.0};
        ex.add(eval_at(cs.h_derivative(order), p), p);
    }
    return ex;
}

void fail_with(CheckResult& c, const Point& at, double value) {
    c.status = CheckStatus::fail;
    c.witness = Witness{at, value};
}

// Bounded sup|phi| and Hoelder quotients for a named list of functions.
struct NamedFunction {
    std::string name;
    CompiledExpr fn;
};

void bounded_and_hoelder(CheckResult& c, const std::vector<NamedFunction>& fns, std::initializer_list<Var> axes,
                         const Region& r, const CheckOptions& opt, bool record_sup) {
    for (const auto& nf : fns) {
        const Extremes ex = scan(nf.fn, r);
        if (record_sup) c.values.emplace_back("sup|" + nf.name + "|", ex.sup_abs());
        if (!ex.finite) {
            if (c.status != CheckStatus::fail) fail_with(c, ex.at_nonfinite, kInf);
            c.note = nf.name + " is not finite on the region";
        } else if (ex.sup_abs() > opt.bound_cap && c.status != CheckStatus::fail) {
            const bool hi = std::abs(ex.hi) >= std::abs(ex.lo);
            fail_with(c, hi ? ex.at_hi : ex.at_lo, hi ? ex.hi : ex.lo);
            c.note = nf.name + " exceeds the bound cap";
        }
        for (Var v : axes) {
            const double q = hoelder_quotient(nf.fn, v, r, opt.beta);
            c.values.emplace_back("holder[" + nf.name + "," + std::string(var_name(v)) + "]", q);
            if (!(q <= opt.bound_cap) && c.status != CheckStatus::fail) {
                c.status = CheckStatus::fail;
                c.note = "Hoelder quotient of " + nf.name + " in " + std::string(var_name(v)) + " exceeds the cap";
            }
        }
    }
}

std::string partial_name(Coef c, Var a) { return "d_" + std::string(var_name(a)) + " " + std::string(coef_name(c)); }

std::string partial_name(Coef c, Var a, Var b) {
    return "d_" + std::string(var_name(a)) + std::string(var_name(b)) + " " + std::string(coef_name(c));
}

CheckResult check_A2_iii(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    CheckResult c{"A2.iii", "h is bounded with bounded h', h'' and Hoelder h''", {}, {}, {}, {}};
    for (int order = 0; order <= 2; ++order) {
        const Extremes ex = scan_h(cs, order, r);
        c.values.emplace_back(order == 0 ? "sup|h|" : order == 1 ? "sup|h'|" : "sup|h''|", ex.sup_abs());
        if (!(ex.sup_abs() <= opt.bound_cap) && c.status != CheckStatus::fail) {
            fail_with(c, ex.finite ? ex.at_hi : ex.at_nonfinite, ex.finite ? ex.hi : kInf);
        }
    }
    const double q = hoelder_quotient(cs.h_derivative(2), Var::x, r, opt.beta);
    c.values.emplace_back("holder[h'',x]", q);
    if (!(q <= opt.bound_cap)) c.status = CheckStatus::fail;
    return c;
}

CheckResult check_A2_v(const CoefficientSet& cs, const Region& r) {
    CheckResult c{"A2.v", "|f| <= mu~(|u|)(1+|p|), |g| <= mu~(|u|)(1+|p|^2)", CheckStatus::not_checkable, {}, {}, {}};
    const CompiledExpr f(cs.expr(Coef::f));
    const CompiledExpr g(cs.expr(Coef::g));
    double fit = 0.0;
    for_each_point(r, VarSet::all(), [&](const Point& p) {
        fit = std::max(fit, std::abs(eval_at(f, p)) / (1.0 + std::abs(p.p)));
        fit = std::max(fit, std::abs(eval_at(g, p)) / (1.0 + p.p * p.p));
    });
    c.values.emplace_back("mu_tilde", fit);
    c.note = "any continuous f, g satisfy this on a bounded region; the fitted envelope constant is reported";
    return c;
}

CheckResult check_A2_vi(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    CheckResult c{"A2.vi", "a, d_x a, d_u a, f, g are Hoelder continuous", {}, {}, {}, {}};
    const Expr& s = cs.expr(Coef::sigma);
    const Expr a = 0.5 * s * s;
    const std::vector<NamedFunction> fns{
        {"a", CompiledExpr(a)},
        {"d_x a", CompiledExpr(diff(a, Var::x))},
        {"d_u a", CompiledExpr(diff(a, Var::u))},
        {"f", CompiledExpr(cs.expr(Coef::f))},
        {"g", CompiledExpr(cs.expr(Coef::g))},
    };
    bounded_and_hoelder(c, fns, {Var::t, Var::x, Var::u, Var::p}, r, opt, false);
    return c;
}

CheckResult check_A2_vii(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    CheckResult c{"A2.vii", "|d_u f| + |d_u g| + |d_p f| + |d_p g| <= gamma(N)", {}, {}, {}, {}};
    Extremes ex;
    for_each_point(r, VarSet::all(), [&](const Point& p) {
        ex.add(std::abs(eval_at(cs.d(Coef::f, Var::u), p)) + std::abs(eval_at(cs.d(Coef::g, Var::u), p)) +
                   std::abs(eval_at(cs.d(Coef::f, Var::p), p)) + std::abs(eval_at(cs.d(Coef::g, Var::p), p)),
               p);
    });
    c.values.emplace_back("N", r.u_bound + r.p_bound);
    c.values.emplace_back("gamma_N", ex.finite ? ex.hi : kInf);
    if (!ex.finite) {
        fail_with(c, ex.at_nonfinite, kInf);
    } else if (ex.hi > opt.bound_cap) {
        fail_with(c, ex.at_hi, ex.hi);
    }
    return c;
}

CheckResult check_A3(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    CheckResult c{"A3", "|sigma| + |d_t sigma| + |d_x sigma| + |d_u sigma| <= alpha; d_x sigma, d_u sigma Hoelder",
                  {}, {}, {}, {}};
    const CompiledExpr sigma(cs.expr(Coef::sigma));
    Extremes ex;
    for_each_point(r, {Var::t, Var::x, Var::u}, [&](const Point& p) {
        ex.add(std::abs(eval_at(sigma, p)) + std::abs(eval_at(cs.d(Coef::sigma, Var::t), p)) + std::abs(eval_at(cs.d(Coef::sigma, Var::x), p)) +
                   std::abs(eval_at(cs.d(Coef::sigma, Var::u), p)),
               p);
    });
    c.values.emplace_back("alpha", ex.finite ? ex.hi : kInf);
    if (!ex.finite) {
        fail_with(c, ex.at_nonfinite, kInf);
    } else if (ex.hi > opt.bound_cap) {
        fail_with(c, ex.at_hi, ex.hi);
    }
    const std::vector<NamedFunction> fns{
        {partial_name(Coef::sigma, Var::x), cs.d(Coef::sigma, Var::x)},
        {partial_name(Coef::sigma, Var::u), cs.d(Coef::sigma, Var::u)},
    };
    bounded_and_hoelder(c, fns, {Var::t, Var::x, Var::u}, r, opt, false);
    return c;
}

CheckResult check_A4(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    CheckResult c{"A4", "first partials of f, g in x, u, p are bounded and Hoelder on the region", {}, {}, {}, {}};
    std::vector<NamedFunction> fns;
    for (Var v : {Var::x, Var::u, Var::p}) {
        for (Coef k : {Coef::f, Coef::g}) fns.push_back({partial_name(k, v), cs.d(k, v)});
    }
    bounded_and_hoelder(c, fns, {Var::t, Var::x, Var::u, Var::p}, r, opt, true);
    return c;
}

struct MonotoneScan {
    Extremes dg;
    Extremes h1;
};

MonotoneScan scan_monotone(const CoefficientSet& cs, const Region& r) {
    return {scan(cs.d(Coef::g, Var::x), r), scan_h(cs, 1, r)};
}

CheckResult check_A5(const CoefficientSet& cs, const Region& r, const CheckOptions& opt, SignMode& sign) {
    CheckResult c{"A5", "(a) h' >= 0 and inf d_x g > 0, or (b) h' <= 0 and sup d_x g < 0", {}, {}, {}, {}};
    const MonotoneScan m = scan_monotone(cs, r);
    if (!m.dg.finite || !m.h1.finite) {
        fail_with(c, m.dg.finite ? m.h1.at_nonfinite : m.dg.at_nonfinite, kInf);
        sign = SignMode::none;
        return c;
    }
    c.values = {{"inf d_x g", m.dg.lo}, {"sup d_x g", m.dg.hi}, {"min h'", m.h1.lo}, {"max h'", m.h1.hi}};
    const bool a = m.h1.lo >= -opt.sign_tolerance && m.dg.lo >= opt.strict_epsilon;
    const bool b = m.h1.hi <= opt.sign_tolerance && m.dg.hi <= -opt.strict_epsilon;
    sign = a ? SignMode::increasing : b ? SignMode::decreasing : SignMode::none;
    c.values.emplace_back("alternative", a ? 1.0 : b ? -1.0 : 0.0);
    if (sign != SignMode::none) return c;

    if (m.dg.lo >= opt.strict_epsilon) {
        fail_with(c, m.h1.at_lo, m.h1.lo);
        c.note = "inf d_x g > 0 but h' takes negative values";
    } else if (m.dg.hi <= -opt.strict_epsilon) {
        fail_with(c, m.h1.at_hi, m.h1.hi);
        c.note = "sup d_x g < 0 but h' takes positive values";
    } else {
        fail_with(c, m.dg.at_lo, m.dg.lo);
        c.note = "d_x g is not bounded away from 0 with a fixed sign";
    }
    return c;
}

CheckResult check_A5_prime(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    CheckResult c{"A5'", "d_x g >= 0 and h' >= 0", {}, {}, {}, {}};
    const MonotoneScan m = scan_monotone(cs, r);
    c.values = {{"inf d_x g", m.dg.lo}, {"min h'", m.h1.lo}};
    if (!m.dg.finite) {
        fail_with(c, m.dg.at_nonfinite, kInf);
    } else if (m.dg.lo < -opt.sign_tolerance) {
        fail_with(c, m.dg.at_lo, m.dg.lo);
    } else if (!m.h1.finite) {
        fail_with(c, m.h1.at_nonfinite, kInf);
    } else if (m.h1.lo < -opt.sign_tolerance) {
        fail_with(c, m.h1.at_lo, m.h1.lo);
    }
    return c;
}

CheckResult check_A6(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    CheckResult c{"A6", "d_x sigma >= 0 and d_u sigma >= 0", {}, {}, {}, {}};
    const Extremes sx = scan(cs.d(Coef::sigma, Var::x), r);
    const Extremes su = scan(cs.d(Coef::sigma, Var::u), r);
    c.values = {{"inf d_x sigma", sx.lo}, {"inf d_u sigma", su.lo}};
    if (!sx.finite) {
        fail_with(c, sx.at_nonfinite, kInf);
    } else if (sx.lo < -opt.sign_tolerance) {
        fail_with(c, sx.at_lo, sx.lo);
    } else if (!su.finite) {
        fail_with(c, su.at_nonfinite, kInf);
    } else if (su.lo < -opt.sign_tolerance) {
        fail_with(c, su.at_lo, su.lo);
    }
    return c;
}

CheckResult check_A7(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    CheckResult c{"A7", "second partials of f, g in x, u, p are bounded and Hoelder on the region", {}, {}, {}, {}};
    std::vector<NamedFunction> fns;
    const std::pair<Var, Var> pairs[] = {{Var::p, Var::x}, {Var::p, Var::u}, {Var::p, Var::p},
                                         {Var::x, Var::x}, {Var::x, Var::u}, {Var::u, Var::u}};
    for (Coef k : {Coef::f, Coef::g}) {
        for (auto [a, b] : pairs) fns.push_back({partial_name(k, a, b), cs.d(k, a, b)});
    }
    bounded_and_hoelder(c, fns, {Var::t, Var::x, Var::u, Var::p}, r, opt, true);
    return c;
}

CheckResult check_A8(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    CheckResult c{"A8", "inf d_xx g > 0 and h'' >= 0", {}, {}, {}, {}};
    const Extremes gxx = scan(cs.d(Coef::g, Var::x, Var::x), r);
    const Extremes h2 = scan_h(cs, 2, r);
    c.values = {{"inf d_xx g", gxx.lo}, {"min h''", h2.lo}};
    if (!gxx.finite) {
        fail_with(c, gxx.at_nonfinite, kInf);
    } else if (gxx.lo < opt.strict_epsilon) {
        fail_with(c, gxx.at_lo, gxx.lo);
    } else if (!h2.finite) {
        fail_with(c, h2.at_nonfinite, kInf);
    } else if (h2.lo < -opt.sign_tolerance) {
        fail_with(c, h2.at_lo, h2.lo);
    }
    return c;
}

}  // namespace

double hoelder_quotient(const CompiledExpr& phi, Var v, const Region& r, double beta) {
    const VarSet vars = phi.source().free_variables();
    if (!vars.contains(v)) return 0.0;
    const double e = v == Var::t ? 0.5 * beta : beta;
    double lo = 0.0;
    double hi = 0.0;
    switch (v) {
        case Var::t: lo = r.t_lo, hi = r.t_hi; break;
        case Var::x: lo = r.x_lo, hi = r.x_hi; break;
        case Var::u: lo = -r.u_bound, hi = r.u_bound; break;
        case Var::p: lo = -r.p_bound, hi = r.p_bound; break;
    }
    double q = 0.0;
    for_each_point(r, vars, [&](const Point& a) {
        const double fa = eval_at(phi, a);
        for (double s : kHoelderScales) {
            if (s > hi - lo) continue;
            Point b = a;
            b[v] = a[v] + s <= hi ? a[v] + s : a[v] - s;
            const double d = std::abs(eval_at(phi, b) - fa) / std::pow(s, e);
            q = std::isfinite(d) ? std::max(q, d) : kInf;
        }
    });
    return q;
}

CheckResult check_A1(const CoefficientSet& cs, const Region& r) {
    r.validate();
    CheckResult c{"A1", "nu(|u|) <= sigma <= mu(|u|) with nu > 0", {}, {}, {}, {}};
    const Extremes ex = scan(CompiledExpr(cs.expr(Coef::sigma)), r);
    if (!ex.finite) {
        c.values = {{"nu", -kInf}, {"mu", kInf}};
        fail_with(c, ex.at_nonfinite, kInf);
        return c;
    }
    c.values = {{"nu", ex.lo}, {"mu", ex.hi}};
    if (ex.lo <= 0.0) fail_with(c, ex.at_lo, ex.lo);
    return c;
}

CheckResult check_growth_g(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    r.validate();
    CheckResult c{"A2.ii", "g u <= c1 + c2 |u|^2", {}, {}, {}, {}};
    struct Sample {
        double gu;
        double u2;
        Point at;
    };
    const CompiledExpr g(cs.expr(Coef::g));
    std::vector<Sample> samples;
    for_each_point(r, g.source().free_variables() | VarSet{Var::u}, [&](const Point& p) {
        samples.push_back({eval_at(g, p) * p.u, p.u * p.u, p});
    });
    auto c1_for = [&](double c2, const Sample** arg) {
        double m = 0.0;
        for (const auto& s : samples) {
            const double v = s.gu - c2 * s.u2;
            if (!(v <= m)) {
                m = std::isfinite(v) ? v : kInf;
                if (arg != nullptr) *arg = &s;
            }
        }
        return m;
    };
    const int n = std::max(1, opt.growth_trials);
    const Sample* worst = nullptr;
    const double best_c1 = c1_for(opt.growth_cap, &worst);
    double best_c2 = opt.growth_cap;
    for (int k = 0; k <= n; ++k) {
        const double c2 = opt.growth_cap * k / n;
        if (c1_for(c2, nullptr) <= best_c1) {
            best_c2 = c2;
            break;
        }
    }
    c.values = {{"c1", best_c1}, {"c2", best_c2}};
    if (!(best_c1 <= opt.c1_cap)) {
        fail_with(c, worst->at, worst->gu);
        c.note = "no c1 within the cap at c2 = " + format_double(opt.growth_cap);
    }
    return c;
}

std::array<Expr, 5> psi_expressions(const CoefficientSet& cs) {
    auto d1 = [&](Coef k, Var a) { return cs.d(k, a).source(); };
    auto d2 = [&](Coef k, Var a, Var b) { return cs.d(k, a, b).source(); };
    using enum Var;
    const Coef f = Coef::f;
    const Coef g = Coef::g;
    const Coef s = Coef::sigma;
    const Expr two = Expr::constant(2.0);
    return {
        d2(f, x, x) + two * d2(g, x, u) + d1(g, p) * d2(s, x, x) + d2(g, p, x) * d1(s, x),
        d2(g, u, u) + two * d2(f, u, x) + two * d2(g, p, x) * d1(s, u) + two * d2(g, p, u) * d1(s, x) +
            two * d2(f, p, x) * d1(s, x) + two * d1(g, p) * d2(s, x, u) + d2(g, p, p) * d1(s, x) * d1(s, x),
        d2(f, u, u) + two * d2(g, p, u) * d1(s, u) + two * d2(f, p, u) * d1(s, x) + two * d2(f, p, x) * d1(s, u) +
            two * d2(g, p, p) * d1(s, x) * d1(s, u) + two * d1(f, p) * d2(s, x, u) + d1(g, p) * d2(s, u, u) +
            d2(f, p, p) * d1(s, x) * d1(s, x),
        two * d2(f, u, p) * d1(s, u) + two * d2(f, p, p) * d1(s, x) * d1(s, u) + d1(f, p) * d2(s, u, u) +
            d2(g, p, p) * d1(s, u) * d1(s, u),
        d2(f, p, p),
    };
}

CheckResult check_A9(const CoefficientSet& cs, const Region& r, const CheckOptions& opt) {
    r.validate();
    CheckResult c{"A9", "Psi_1 .. Psi_5 >= 0 on the region", {}, {}, {}, {}};
    const auto psi = psi_expressions(cs);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const Extremes ex = scan(CompiledExpr(psi[i]), r);
        const std::string key = "psi" + std::to_string(i + 1);
        if (!ex.finite) {
            c.values.emplace_back(key, -kInf);
            if (c.status != CheckStatus::fail) fail_with(c, ex.at_nonfinite, -kInf);
            continue;
        }
        c.values.emplace_back(key, ex.lo);
        if (ex.lo < -opt.psi_tolerance && c.status != CheckStatus::fail) {
            fail_with(c, ex.at_lo, ex.lo);
            c.note = "negative combination Psi_" + std::to_string(i + 1);
        }
    }
    return c;
}

AssumptionReport check_all(const CoefficientSet& cs, const Region& r, CheckMode mode, const CheckOptions& opt) {
    r.validate();
    AssumptionReport rep;
    rep.mode = mode;
    rep.region = r;
    rep.beta = opt.beta;
    rep.strict_epsilon = opt.strict_epsilon;
    rep.warnings.emplace_back(
        "all checks sample a truncated region and are necessary conditions only, not proofs over the real line");
    if (cs.uses_abs()) {
        rep.warnings.emplace_back("abs is not twice differentiable at 0; derivatives use sign(0) = 0 there");
    }

    auto& checks = rep.checks;
    checks.push_back(check_A1(cs, r));
    rep.nu = checks.back().value("nu");
    rep.mu = checks.back().value("mu");
    checks.push_back(check_growth_g(cs, r, opt));
    rep.c1 = checks.back().value("c1");
    rep.c2 = checks.back().value("c2");
    checks.push_back(check_A2_iii(cs, r, opt));
    checks.push_back(check_A2_v(cs, r));
    checks.push_back(check_A2_vi(cs, r, opt));
    checks.push_back(check_A2_vii(cs, r, opt));
    checks.push_back(check_A3(cs, r, opt));
    rep.alpha = checks.back().value("alpha");
    if (mode == CheckMode::x_only) return rep;

    checks.push_back(check_A4(cs, r, opt));
    if (mode == CheckMode::y) {
        checks.push_back(check_A5(cs, r, opt, rep.sign));
        if (checks.back().has("inf d_x g")) {
            rep.dg_inf = checks.back().value("inf d_x g");
            rep.dg_sup = checks.back().value("sup d_x g");
        }
        return rep;
    }

    checks.push_back(check_A5_prime(cs, r, opt));
    rep.dg_inf = checks.back().value("inf d_x g");
    checks.push_back(check_A6(cs, r, opt));
    checks.push_back(check_A7(cs, r, opt));
    checks.push_back(check_A8(cs, r, opt));
    rep.dxxg_inf = checks.back().value("inf d_xx g");
    checks.push_back(check_A9(cs, r, opt));
    std::array<double, 5> mins{};
    for (std::size_t i = 0; i < 5; ++i) mins[i] = checks.back().value("psi" + std::to_string(i + 1));
    rep.psi_min = mins;
    return rep;
}

}  // namespace fbsde
