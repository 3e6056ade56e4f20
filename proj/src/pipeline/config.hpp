// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "coeffs/coefficient_set.hpp"
#include "pde/grid.hpp"
#include "sde/paths.hpp"
#include "verify/density.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace fbsde {

/// How the envelope of one component is built.
enum class EnvelopeMode {
    theoretical,  ///< comparison-construction curves; the curve assumption is blocking
    empirical,    ///< grid-measured curves; the curve assumption is reported but not blocking
    skip,
};
std::string_view to_string(EnvelopeMode m) noexcept;

enum class Corruption { none, halve_L, zero_M_psi };
std::string_view to_string(Corruption c) noexcept;

struct GridConfig {
    int J = 400;
    int K = 400;
    std::optional<double> halfwidth;  ///< empty = auto
    BoundaryKind boundary = BoundaryKind::extrapolate;
    double omega = 0.5;
};

struct RegionConfig {
    double halfwidth = 4.0;  ///< measurement window |x - 0| <= halfwidth
    std::optional<double> M;
    std::optional<double> M1;
    int nt = 5;
    int nx = 21;
    int nu = 9;
    int np = 9;
    double beta = 0.5;
};

struct McConfig {
    std::size_t paths = 10000;
    int steps = 200;
    std::uint64_t seed = 1;
    std::size_t malliavin_paths = 10000;
    std::vector<double> times;                     ///< observation times
    std::vector<std::pair<double, double>> pairs;  ///< Malliavin (r, t) pairs
};

struct VerifyConfig {
    BandwidthRule bandwidth = BandwidthRule::silverman;
    double bandwidth_value = 0.0;
    int grid_points = 201;
    int bootstrap = 200;
    std::uint64_t bootstrap_seed = 20240601;
    double z = 3.0;
    double allowance = 0.01;
    double window_sd = 4.0;
    std::vector<double> tail_probes{0.5, 1.0, 2.0};
    double tail_confidence = 0.99;
    double malliavin_threshold = 0.999;
    Representation representation = Representation::first_variation;
    Corruption corruption = Corruption::none;
};

struct RunConfig {
    CoefficientSource coefficients;
    double x0 = 0.0;
    double T = 1.0;
    GridConfig grid;
    RegionConfig region;
    McConfig mc;
    std::array<EnvelopeMode, 3> envelope{EnvelopeMode::theoretical, EnvelopeMode::theoretical,
                                         EnvelopeMode::theoretical};
    VerifyConfig verify;
    std::vector<double> bound_times;
    /// Default output directory; not part of the canonical JSON or the hash.
    std::string out_dir = "out";

    EnvelopeMode mode(Component c) const noexcept { return envelope[static_cast<std::size_t>(c)]; }
    Grid make_grid() const;

    /// Canonical JSON with every default filled in (keys sorted).
    nlohmann::json to_json() const;
    /// SHA-256 of the canonical JSON text.
    std::string hash() const;
};

/// Parses YAML (or JSON) text. Unknown keys, wrong types and out-of-range values
/// throw ConfigError carrying the JSON pointer of the field. Resolves the auto
/// grid halfwidth and defaults the time lists.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical serialization used for resolved configs and hashing.
std::string canonical_dump(const nlohmann::json& j);

}  // namespace fbsde
