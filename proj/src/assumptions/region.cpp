// SPDX-License-Identifier: Apache-2.0
#include "assumptions/region.hpp"

#include "common/error.hpp"

#include <cmath>

namespace fbsde {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double q = static_cast<double>(i) / static_cast<double>(n - 1);
        out[static_cast<std::size_t>(i)] = i == n - 1 ? hi : lo + (hi - lo) * q;
    }
    return out;
}

void Region::validate() const {
    if (!(t_hi > t_lo) || !(x_hi > x_lo) || !(u_bound > 0.0) || !(p_bound > 0.0)) {
        throw ArgumentError("region intervals must be non-degenerate");
    }
    if (!std::isfinite(t_hi - t_lo) || !std::isfinite(x_hi - x_lo) || !std::isfinite(u_bound) ||
        !std::isfinite(p_bound)) {
        throw ArgumentError("region bounds must be finite");
    }
    if (nt < 3 || nx < 3 || nu < 3 || np < 3) throw ArgumentError("region sample counts must be at least 3");
}

Region Region::refined() const {
    Region r = *this;
    r.nt = 2 * nt - 1;
    r.nx = 2 * nx - 1;
    r.nu = 2 * nu - 1;
    r.np = 2 * np - 1;
    return r;
}

std::vector<double> Region::t_samples() const { return linspace(t_lo, t_hi, nt); }
std::vector<double> Region::x_samples() const { return linspace(x_lo, x_hi, nx); }
std::vector<double> Region::u_samples() const { return linspace(-u_bound, u_bound, nu); }
std::vector<double> Region::p_samples() const { return linspace(-p_bound, p_bound, np); }

}  // namespace fbsde
