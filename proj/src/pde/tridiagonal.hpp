// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common/error.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace fbsde {

/// Thomas algorithm for lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
/// lower[0] and upper[n-1] are ignored. No pivoting: the systems assembled here
/// are diagonally dominant for parabolic steps.
class TridiagonalSolver {
public:
    void solve(std::span<const double> lower, std::span<const double> diag,
               std::span<const double> upper, std::span<const double> rhs, std::span<double> x) {
        const std::size_t n = diag.size();
        c_prime_.resize(n);
        double denom = diag[0];
        if (denom == 0.0) throw NumericalError("singular tridiagonal system (zero pivot at row 0)");
        c_prime_[0] = n > 1 ? upper[0] / denom : 0.0;
        x[0] = rhs[0] / denom;
        // Forward sweep
        for (std::size_t i = 1; i < n; ++i) {
            denom = diag[i] - lower[i] * c_prime_[i - 1];
            if (denom == 0.0 || !std::isfinite(denom)) {
                throw NumericalError("singular tridiagonal system (zero pivot at row " + std::to_string(i) + ")");
            }
            c_prime_[i] = i + 1 < n ? upper[i] / denom : 0.0;
            x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
        }
        // Back substitution
        for (std::size_t i = n - 1; i > 0; --i) x[i - 1] -= c_prime_[i - 1] * x[i];
    }

private:
    std::vector<double> c_prime_;
};

}  // namespace fbsde
