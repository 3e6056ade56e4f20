// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "assumptions/region.hpp"
#include "assumptions/report.hpp"
#include "coeffs/coefficient_set.hpp"

#include <array>
#include <span>

namespace fbsde {

struct CheckOptions {
    double beta = 0.5;               ///< Hoelder exponent (t uses beta / 2)
    double strict_epsilon = 1e-8;    ///< "> 0" is tested as ">= strict_epsilon"
    double sign_tolerance = 1e-12;   ///< ">= 0" is tested as ">= -sign_tolerance"
    double psi_tolerance = 1e-12;
    double growth_cap = 100.0;       ///< largest c2 tried
    int growth_trials = 1000;        ///< c2 grid is growth_cap * k / growth_trials
    double c1_cap = 1e6;
    double bound_cap = 1e8;          ///< sampled sups and Hoelder quotients above this fail
};

/// Pair separations used by the Hoelder quotient estimates.
inline constexpr std::array<double, 4> kHoelderScales{1e-3, 1e-2, 1e-1, 0.5};

/// Sampled inf / sup of sigma; values "nu", "mu". Fails iff nu <= 0.
CheckResult check_A1(const CoefficientSet& cs, const Region& r);

/// Least c1, then least c2, with g u <= c1 + c2 u^2 at every sample; values "c1", "c2".
CheckResult check_growth_g(const CoefficientSet& cs, const Region& r, const CheckOptions& opt = {});

/// Sampled minima of the five second-order combinations; values "psi1".."psi5".
CheckResult check_A9(const CoefficientSet& cs, const Region& r, const CheckOptions& opt = {});

/// The five combinations as expressions, in order.
std::array<Expr, 5> psi_expressions(const CoefficientSet& cs);

/// max |phi(a) - phi(b)| / |a - b|^e over sample points a and b = a + s e_v,
/// s in kHoelderScales, with e = beta / 2 for t and beta otherwise.
double hoelder_quotient(const CompiledExpr& phi, Var v, const Region& r, double beta);

/// Runs the checks required by `mode` and fills the report constants.
AssumptionReport check_all(const CoefficientSet& cs, const Region& r, CheckMode mode,
                           const CheckOptions& opt = {});

}  // namespace fbsde
