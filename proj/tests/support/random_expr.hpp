// SPDX-License-Identifier: Apache-2.0
#pragma once

// Random smooth expressions for property tests. Arguments of log/sqrt/div
// are wrapped so they stay bounded away from singularities on [-1, 1]^4.

#include "coeffs/expr.hpp"

#include <random>

namespace fbsde::testing {

class RandomExprGenerator {
public:
    explicit RandomExprGenerator(std::uint64_t seed, VarSet vars = VarSet::all()) : rng_(seed) {
        for (Var v : kAllVars) {
            if (vars.contains(v)) vars_.push_back(v);
        }
    }

    Expr operator()(int depth = 4) { return gen(depth); }

    Point point() {
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        return Point{d(rng_), d(rng_), d(rng_), d(rng_)};
    }

private:
    Expr leaf() {
        std::uniform_int_distribution<int> pick(0, 3);
        if (pick(rng_) == 0) {
            std::uniform_int_distribution<int> num(-20, 20);
            return Expr::constant(num(rng_) / 4.0);
        }
        std::uniform_int_distribution<std::size_t> v(0, vars_.size() - 1);
        return Expr::variable(vars_[v(rng_)]);
    }

    Expr gen(int depth) {
        if (depth <= 0) return leaf();
        std::uniform_int_distribution<int> pick(0, 13);
        const Expr a = gen(depth - 1);
        switch (pick(rng_)) {
            case 0: return a + gen(depth - 1);
            case 1: return a - gen(depth - 1);
            case 2: return a * gen(depth - 1);
            case 3: return a / (2.0 + Expr::call(Func::cos, gen(depth - 1)));
            case 4: return pow(Expr::call(Func::tanh, a), 2.0);
            case 5: return pow(Expr::call(Func::sin, a), 3.0);
            case 6: return Expr::call(Func::exp, Expr::call(Func::tanh, a));
            case 7: return Expr::call(Func::log, 1.5 + Expr::call(Func::tanh, a));
            case 8: return Expr::call(Func::sqrt, 1.0 + pow(a, 2.0));
            case 9: return Expr::call(Func::atan, a);
            case 10: return -a;
            case 11: return Expr::call(Func::cos, a);
            case 12: return pow(1.5 + Expr::call(Func::sin, a), Expr::call(Func::cos, gen(depth - 1)));
            default: return leaf();
        }
    }

    std::mt19937_64 rng_;
    std::vector<Var> vars_;
};

}  // namespace fbsde::testing
