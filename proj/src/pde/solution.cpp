// SPDX-License-Identifier: Apache-2.0
#include "pde/solution.hpp"

#include "common/error.hpp"
#include "common/format.hpp"

#include <algorithm>
#include <cmath>

namespace fbsde {

PdeSolution::PdeSolution(Grid grid, std::vector<double> theta, std::vector<int> newton_iterations)
    : grid_(grid), theta_(std::move(theta)), newton_iterations_(std::move(newton_iterations)) {
    grid_.validate();
    if (theta_.size() != grid_.nodes() * grid_.levels()) {
        throw ArgumentError("solution field has the wrong size for its grid");
    }
    M_ = 0.0;
    for (double v : theta_) {
        if (!std::isfinite(v)) throw NumericalError("non-finite value in PDE solution");
        M_ = std::max(M_, std::abs(v));
    }
}

std::span<const double> PdeSolution::field(Field f) const noexcept {
    switch (f) {
        case Field::value: return theta_;
        case Field::dx: return theta_x_;
        case Field::dxx: return theta_xx_;
    }
    return theta_;
}

void PdeSolution::set_derivatives(std::vector<double> dx, std::vector<double> dxx,
                                  std::vector<unsigned char> low) {
    if (dx.size() != theta_.size() || dxx.size() != theta_.size() || low.size() != grid_.nodes()) {
        throw ArgumentError("derivative fields have the wrong size");
    }
    theta_x_ = std::move(dx);
    theta_xx_ = std::move(dxx);
    low_confidence_ = std::move(low);
    M1_ = 0.0;
    for (int k = 0; k <= grid_.K; ++k) {
        for (int j = 0; j <= grid_.J; ++j) {
            if (low_confidence(j)) continue;
            M1_ = std::max(M1_, std::abs(theta_x(k, j)));
        }
    }
}

std::pair<int, int> PdeSolution::trusted_nodes(double x_lo, double x_hi) const {
    int first = grid_.J;
    int last = 0;
    for (int j = 0; j <= grid_.J; ++j) {
        const double x = grid_.x(j);
        if (low_confidence(j) || x < x_lo - 1e-12 || x > x_hi + 1e-12) continue;
        first = std::min(first, j);
        last = std::max(last, j);
    }
    if (first > last) throw ArgumentError("measurement window contains no trusted grid node");
    return {first, last};
}

PdeSolution::Stencil PdeSolution::locate(double t, double x) const noexcept {
    Stencil s;
    const double tau = std::clamp(grid_.T - t, 0.0, grid_.T);
    const double level = tau / grid_.dt();
    s.level0 = std::clamp(static_cast<int>(std::floor(level)), 0, grid_.K - 1);
    s.level_frac = std::clamp(level - s.level0, 0.0, 1.0);

    double xs = x;
    if (x < grid_.x_lo || x > grid_.x_hi) {
        s.outside = true;
        xs = std::clamp(x, grid_.x_lo, grid_.x_hi);
    }
    const double pos = (xs - grid_.x_lo) / grid_.dx();
    s.node0 = std::clamp(static_cast<int>(std::floor(pos)) - 1, 0, grid_.J - 3);
    const double r = pos - s.node0;
    s.weights = {-(r - 1.0) * (r - 2.0) * (r - 3.0) / 6.0, r * (r - 2.0) * (r - 3.0) / 2.0,
                 -r * (r - 1.0) * (r - 3.0) / 2.0, r * (r - 1.0) * (r - 2.0) / 6.0};
    return s;
}

double PdeSolution::interpolate(const Stencil& s, Field f) const noexcept {
    const double* data = field(f).data();
    const double* a = data + offset(s.level0, s.node0);
    const double* b = a + grid_.nodes();
    double va = 0.0;
    double vb = 0.0;
    for (int i = 0; i < 4; ++i) {
        va += s.weights[i] * a[i];
        vb += s.weights[i] * b[i];
    }
    return va + s.level_frac * (vb - va);
}

PdeSolution::Value PdeSolution::at(double t, double x) const noexcept {
    const Stencil s = locate(t, x);
    Value v;
    v.u = interpolate(s, Field::value);
    if (has_derivatives()) {
        v.ux = interpolate(s, Field::dx);
        v.uxx = interpolate(s, Field::dxx);
    }
    return v;
}

std::string PdeSolution::to_csv(int level_stride, int node_stride) const {
    CsvWriter csv({"t", "x", "u", "ux", "uxx"});
    level_stride = std::max(1, level_stride);
    node_stride = std::max(1, node_stride);
    for (int k = 0; k <= grid_.K; k += level_stride) {
        for (int j = 0; j <= grid_.J; j += node_stride) {
            csv.cell(grid_.t(k)).cell(grid_.x(j)).cell(u(k, j));
            csv.cell(has_derivatives() ? ux(k, j) : 0.0).cell(has_derivatives() ? uxx(k, j) : 0.0);
            csv.end_row();
        }
    }
    return csv.str();
}

}  // namespace fbsde
