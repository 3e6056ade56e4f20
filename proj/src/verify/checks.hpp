// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "bounds/bounds.hpp"
#include "sde/paths.hpp"
#include "verify/density.hpp"

#include <span>
#include <string>
#include <vector>

namespace fbsde {

struct EnvelopePoint {
    double x = 0.0;
    double kde = 0.0;
    double stderr_ = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    /// Distance to the nearest side of the widened band; negative on a violation.
    double margin = 0.0;
    bool pass = true;
};

struct EnvelopeVerdict {
    double z = 3.0;
    double bias_budget = 0.0;
    double allowance = 0.01;
    double window_measure = 0.0;
    double violation_measure = 0.0;
    std::vector<EnvelopePoint> points;
    bool pass = true;

    std::size_t violations() const noexcept;
};

/// Point x passes iff lower - z se - bias <= kde <= upper + z se + bias. Each
/// grid point carries its trapezoid cell width; the verdict passes iff failing
/// cells cover at most `allowance` of the window. A positive `absdev_stderr`
/// widens the curves further to absdev -+ z absdev_stderr.
EnvelopeVerdict check_envelope(const DensityEstimate& de, const EnvelopeParams& ep, double z = 3.0,
                               double allowance = 0.01, double absdev_stderr = 0.0);

enum class TailOutcome { pass, fail, inconclusive, not_applicable };
std::string_view to_string(TailOutcome o) noexcept;

struct TailProbe {
    double x = 0.0;
    TailSide side = TailSide::upper;
    std::size_t count = 0;  ///< samples with F >= x (upper) or F <= -x (lower)
    std::size_t n = 0;
    double empirical = 0.0;
    double ci_lower = 0.0;  ///< one-sided Clopper-Pearson bounds at `confidence`
    double ci_upper = 1.0;
    double bound = 1.0;
    TailOutcome outcome = TailOutcome::pass;
};

/// One-sided Clopper-Pearson bounds for k successes out of n.
double clopper_pearson_upper(std::size_t k, std::size_t n, double confidence);
double clopper_pearson_lower(std::size_t k, std::size_t n, double confidence);

/// Both sides at every probe x > 0. Pass when the upper confidence bound is at
/// most the tail bound, fail when the lower confidence bound exceeds it,
/// inconclusive otherwise. Probes on the wrong side of the mean (x <= mean for
/// the upper side, x <= -mean for the lower side) are not applicable.
std::vector<TailProbe> check_tails(std::span<const double> samples, double mean, double L,
                                   const std::vector<double>& probes, double confidence = 0.99);

struct MalliavinInterval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Bounds on D_r F_t at time t: X uses [nu e^{-M_psi t}, mu e^{M_psi t}];
/// Y uses [m(t) nu e^{-M_psi t}, M1 mu e^{M_psi t}] after folding by `sign`;
/// Z uses [nu^2 rho(t) e^{-M_psi t}, mu gamma e^{M_psi t}]. Missing curves give a zero lower bound.
MalliavinInterval malliavin_interval(Component c, double t, const BoundConstants& bc);

struct MalliavinBoundResult {
    Component component = Component::X;
    Representation representation = Representation::first_variation;
    std::size_t samples = 0;
    std::size_t inside = 0;
    double fraction = 1.0;
    double threshold = 0.999;
    bool pass = true;
    /// Worst relative excursion outside the interval (0 when all inside).
    double worst_excess = 0.0;
};

/// Fraction of (path, pair) samples with r <= t and t > 0 inside the interval,
/// widened by the per-sample discretization tolerance. Exited paths are skipped.
MalliavinBoundResult check_malliavin_bounds(const PathSet& ps, const BoundConstants& bc, Component c, int sign = 1,
                                            Representation rep = Representation::first_variation,
                                            double threshold = 0.999);

}  // namespace fbsde
