// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coeffs/coefficient_set.hpp"
#include "sde/paths.hpp"

namespace fbsde {

struct GaussianLaw {
    double mean = 0.0;
    double variance = 0.0;
    /// Point mass (variance 0): no density exists.
    bool degenerate() const noexcept { return variance <= 0.0; }
    double pdf(double x) const;
    double survival(double x) const;  ///< P(F >= x)
};

/// Closed-form laws of X_t, Y_t, Z_t for f = a x + b (no t, u, p), constant
/// sigma > 0, g = 0 and affine h = c x + d. Then u(t, x) = A(t) x + B(t) with
/// A(t) = c e^{a (T - t)}, X is Gaussian (Ornstein-Uhlenbeck or Brownian with
/// drift) and Z = A(t) sigma is deterministic.
class GaussianOracle {
public:
    /// Throws RefusedError when the coefficients are outside the solvable family.
    GaussianOracle(const CoefficientSet& cs, double x0, double T);
    static bool solvable(const CoefficientSet& cs);

    GaussianLaw law(Component c, double t) const;
    double u(double t, double x) const;

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double sigma() const noexcept { return sigma_; }

private:
    double A(double t) const;
    double B(double t) const;

    double a_ = 0.0, b_ = 0.0, sigma_ = 1.0, c_ = 1.0, d_ = 0.0, x0_ = 0.0, T_ = 1.0;
};

}  // namespace fbsde
