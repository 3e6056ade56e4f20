// SPDX-License-Identifier: Apache-2.0
#include "pde/grid.hpp"

#include "common/error.hpp"

#include <cmath>

namespace fbsde {

std::string to_string(BoundaryKind b) {
    return b == BoundaryKind::dirichlet ? "dirichlet" : "extrapolate";
}

BoundaryKind boundary_from_string(const std::string& s) {
    if (s == "dirichlet") return BoundaryKind::dirichlet;
    if (s == "extrapolate") return BoundaryKind::extrapolate;
    throw ArgumentError("unknown boundary kind '" + s + "'");
}

void Grid::validate() const {
    if (!(x_hi > x_lo) || !std::isfinite(x_lo) || !std::isfinite(x_hi)) {
        throw ArgumentError("grid needs x_lo < x_hi");
    }
    if (J < 8) throw ArgumentError("grid needs J >= 8");
    if (K < 1) throw ArgumentError("grid needs K >= 1");
    if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError("grid needs T > 0");
    if (!(omega >= 0.0 && omega <= 1.0)) throw ArgumentError("theta-scheme weight must lie in [0, 1]");
}

}  // namespace fbsde
