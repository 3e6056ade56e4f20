// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sde/driving.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fbsde {

enum class Representation { first_variation = 0, psi_exponential = 1 };
std::string_view to_string(Representation r) noexcept;

enum class Component { X = 0, Y = 1, Z = 2 };
std::string_view to_string(Component c) noexcept;

/// One (r, t) pair for Malliavin derivatives, snapped to the step lattice.
struct MalliavinPair {
    double r = 0.0;
    double t = 0.0;
    int step_r = 0;
    int step_t = 0;
};

struct SimulationOptions {
    std::size_t n_paths = 10000;
    int n_steps = 200;
    std::uint64_t seed = 1;
    unsigned threads = 1;                ///< 0 = hardware concurrency
    std::vector<double> observation_times;  ///< empty = {T/4, T/2, 3T/4, T}
    std::vector<std::pair<double, double>> pairs;  ///< empty = default (r, t) set; r > t pairs are kept (value 0)
    bool malliavin = true;
};

/// Default pairs: r in {0, T/4, T/2}, t in {T/2, 3T/4, T}, r <= t.
std::vector<std::pair<double, double>> default_malliavin_pairs(double T);

/// Monte Carlo ensemble. Arrays indexed [slot * n_paths + path].
struct PathSet {
    std::size_t n_paths = 0;
    int n_steps = 0;
    double T = 1.0;
    std::uint64_t seed = 0;
    bool has_yz = false;

    std::vector<double> times;  ///< observation times (on the lattice)
    std::vector<int> steps;
    std::vector<double> X, Y, Z;
    std::vector<unsigned char> exited;  ///< per path: left the truncated domain at some step

    std::vector<MalliavinPair> pairs;
    /// [representation][pair * n_paths + path]
    std::vector<double> DX[2], DY[2], DZ[2];
    /// Per-sample discretization tolerance 3 |fine - coarse (2 dt)| of the first-variation values.
    std::vector<double> tolX, tolY, tolZ;

    double dt() const noexcept { return T / n_steps; }
    std::span<const double> values(Component c, std::size_t obs) const;
    std::span<const double> malliavin(Component c, Representation rep, std::size_t pair) const;
    std::span<const double> tolerance(Component c, std::size_t pair) const;
    std::size_t observation_index(double t) const;

    /// Values of component `c` at observation `obs` over non-exited paths.
    std::vector<double> kept(Component c, std::size_t obs) const;
    std::size_t exited_count() const noexcept;

    /// Per observation time and component: n, exited, mean, std, absdev, quantiles.
    std::string summary_csv() const;
    /// Final observation: path, exited, X, Y, Z.
    std::string terminal_csv() const;
};

/// A single stored trajectory with its normal increments.
struct Path {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> dB;
};

Path simulate_path(const DrivingCoefficients& dc, double x0, int n_steps, std::uint64_t seed,
                   std::uint64_t path_id);

/// D_r X_t along `path`; r, t are snapped to the lattice, r > t gives 0.
double malliavin_X(const Path& path, const DrivingCoefficients& dc, double r, double t, Representation rep);

struct MalliavinYZ {
    double DY = 0.0;
    double DZ = 0.0;
};
/// D_r Y_t = u_x D_r X_t and D_r Z_t = (u_x sigma~_x + u_xx sigma~) D_r X_t at (t, X_t).
MalliavinYZ malliavin_YZ(const Path& path, const DrivingCoefficients& dc, double r, double t,
                         Representation rep = Representation::first_variation);

/// Euler-Maruyama ensemble; normals are keyed by (seed, path, step), so results
/// do not depend on `threads`. Throws NumericalError on a non-finite state.
PathSet simulate_paths(const DrivingCoefficients& dc, double x0, const SimulationOptions& opt);

}  // namespace fbsde
