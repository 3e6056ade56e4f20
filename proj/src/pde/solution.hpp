// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pde/grid.hpp"

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fbsde {

/// Solution of the time-reversed Cauchy problem on a Grid.
///
/// Storage is on the reversed clock: theta(k, j) is the value at reversed
/// time k*dt, i.e. physical time T - k*dt. The physical-time accessors
/// u(k, j) = theta(K - k, j) are exact index reversals.
class PdeSolution {
public:
    enum class Field { value, dx, dxx };

    /// Interpolation stencil: cubic Lagrange in x, linear in t.
    struct Stencil {
        int level0 = 0;        // reversed-clock level
        double level_frac = 0; // weight of level0 + 1
        int node0 = 0;
        std::array<double, 4> weights{};
        bool outside = false;  // x was outside [x_lo, x_hi] and got clamped
    };

    struct Value {
        double u = 0.0;
        double ux = 0.0;
        double uxx = 0.0;
    };

    PdeSolution() = default;
    PdeSolution(Grid grid, std::vector<double> theta, std::vector<int> newton_iterations = {});

    const Grid& grid() const noexcept { return grid_; }

    double theta(int k, int j) const noexcept { return theta_[offset(k, j)]; }
    double theta_x(int k, int j) const noexcept { return theta_x_[offset(k, j)]; }
    double theta_xx(int k, int j) const noexcept { return theta_xx_[offset(k, j)]; }

    double u(int k, int j) const noexcept { return theta(grid_.K - k, j); }
    double ux(int k, int j) const noexcept { return theta_x(grid_.K - k, j); }
    double uxx(int k, int j) const noexcept { return theta_xx(grid_.K - k, j); }

    std::span<const double> theta_level(int k) const noexcept {
        return {theta_.data() + offset(k, 0), grid_.nodes()};
    }
    std::span<const double> field(Field f) const noexcept;

    bool has_derivatives() const noexcept { return !theta_x_.empty(); }
    void set_derivatives(std::vector<double> theta_x, std::vector<double> theta_xx,
                         std::vector<unsigned char> low_confidence);
    bool low_confidence(int j) const noexcept { return low_confidence_.empty() || low_confidence_[j] != 0; }

    /// Nodes excluded from constants at each side of the domain.
    static constexpr int kEdgeBand = 3;

    /// Node range [first, last] inside [x_lo, x_hi] that is not low-confidence.
    std::pair<int, int> trusted_nodes(double x_lo, double x_hi) const;

    /// sup |u| over all nodes.
    double M() const noexcept { return M_; }
    /// sup |u_x| over the trusted band (requires derivatives).
    double M1() const noexcept { return M1_; }

    const std::vector<int>& newton_iterations() const noexcept { return newton_iterations_; }

    Stencil locate(double t, double x) const noexcept;
    double interpolate(const Stencil& s, Field f) const noexcept;
    Value at(double t, double x) const noexcept;

    /// CSV with columns t,x,u,ux,uxx on every stride-th physical level and node.
    std::string to_csv(int level_stride = 1, int node_stride = 1) const;

private:
    std::size_t offset(int k, int j) const noexcept {
        return static_cast<std::size_t>(k) * grid_.nodes() + static_cast<std::size_t>(j);
    }

    Grid grid_;
    std::vector<double> theta_;
    std::vector<double> theta_x_;
    std::vector<double> theta_xx_;
    std::vector<unsigned char> low_confidence_;
    std::vector<int> newton_iterations_;
    double M_ = 0.0;
    double M1_ = 0.0;
};

}  // namespace fbsde
