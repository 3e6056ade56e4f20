// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coeffs/expr.hpp"

#include <vector>

namespace fbsde {

/// Truncated sampling box [t_lo,t_hi] x [x_lo,x_hi] x {|u| <= u_bound} x {|p| <= p_bound}.
struct Region {
    double t_lo = 0.0;
    double t_hi = 1.0;
    double x_lo = -1.0;
    double x_hi = 1.0;
    double u_bound = 1.0;  ///< M
    double p_bound = 1.0;  ///< M1
    int nt = 5;
    int nx = 21;
    int nu = 9;
    int np = 9;

    /// Throws ArgumentError on degenerate intervals or sample counts below 3.
    void validate() const;

    /// Nested refinement: every axis goes from n to 2n - 1 samples, so the
    /// old samples are a subset of the new ones.
    Region refined() const;

    std::vector<double> t_samples() const;
    std::vector<double> x_samples() const;
    std::vector<double> u_samples() const;
    std::vector<double> p_samples() const;
};

/// n equally spaced values on [lo, hi]; nested under n -> 2n - 1.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace fbsde
