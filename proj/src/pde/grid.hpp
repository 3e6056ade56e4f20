// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

namespace fbsde {

enum class BoundaryKind {
    dirichlet,    ///< theta = h at the cut
    extrapolate,  ///< second derivative zero (linear extrapolation)
};

std::string to_string(BoundaryKind b);
BoundaryKind boundary_from_string(const std::string& s);

/// Uniform space-time mesh on [x_lo, x_hi] x [0, T].
struct Grid {
    double x_lo = -8.0;
    double x_hi = 8.0;
    int J = 200;  ///< space intervals, nodes j = 0..J
    double T = 1.0;
    int K = 200;  ///< time steps, levels k = 0..K
    BoundaryKind left = BoundaryKind::dirichlet;
    BoundaryKind right = BoundaryKind::dirichlet;
    double omega = 0.5;  ///< theta-scheme weight, 0.5 = Crank-Nicolson

    double dx() const noexcept { return (x_hi - x_lo) / J; }
    double dt() const noexcept { return T / K; }
    double x(int j) const noexcept { return x_lo + j * dx(); }
    /// Physical time of level k (level k of the time-reversed solve is T - k dt).
    double t(int k) const noexcept { return k * dt(); }
    /// Parabolic mesh ratio dt / dx^2.
    double mesh_ratio() const noexcept { return dt() / (dx() * dx()); }
    std::size_t nodes() const noexcept { return static_cast<std::size_t>(J) + 1; }
    std::size_t levels() const noexcept { return static_cast<std::size_t>(K) + 1; }

    /// Throws ArgumentError unless dx > 0, dt > 0, J >= 8, K >= 1, omega in [0, 1].
    void validate() const;
};

}  // namespace fbsde
