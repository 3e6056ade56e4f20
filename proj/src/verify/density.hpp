// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fbsde {

enum class BandwidthRule { silverman, fixed };
std::string_view to_string(BandwidthRule r) noexcept;
BandwidthRule bandwidth_rule_from_string(std::string_view s);

struct DensityOptions {
    BandwidthRule rule = BandwidthRule::silverman;
    double bandwidth = 0.0;  ///< used by the fixed rule
    int grid_points = 201;
    int bootstrap = 200;
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    std::size_t min_samples = 1000;
};

/// Gaussian KDE on an evaluation grid with path-level bootstrap standard errors.
struct DensityEstimate {
    std::size_t n = 0;
    double bandwidth = 0.0;
    std::vector<double> x;
    std::vector<double> value;
    std::vector<double> stderr_;
    /// 1/2 sup |f''| over the grid, so the smoothing bias is at most curvature * h^2.
    double curvature = 0.0;

    double bias_budget() const noexcept { return curvature * bandwidth * bandwidth; }
    /// Trapezoid integral of the estimate over the grid.
    double integral() const;
};

/// 0.9 min(sd, IQR / 1.34) n^{-1/5}.
double silverman_bandwidth(std::span<const double> samples);

/// Estimate on `grid_points` equally spaced points of [lo, hi]. Samples are
/// linearly binned on a lattice of spacing at most h / 32 before smoothing.
/// Throws ArgumentError for fewer than min_samples or a degenerate sample.
DensityEstimate estimate_density(std::span<const double> samples, double lo, double hi,
                                 const DensityOptions& opt = {});

}  // namespace fbsde
