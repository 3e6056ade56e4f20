// SPDX-License-Identifier: Apache-2.0
#include "verify/checks.hpp"

#include "common/error.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>

namespace fbsde {

std::size_t EnvelopeVerdict::violations() const noexcept {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.pass; }));
}

EnvelopeVerdict check_envelope(const DensityEstimate& de, const EnvelopeParams& ep, double z, double allowance,
                               double absdev_stderr) {
    ep.validate();
    if (!(absdev_stderr >= 0.0)) throw ArgumentError("absdev stderr must be non-negative");
    EnvelopeParams lo_ep = ep;
    EnvelopeParams hi_ep = ep;
    lo_ep.absdev = std::max(0.0, ep.absdev - z * absdev_stderr);
    hi_ep.absdev = ep.absdev + z * absdev_stderr;
    EnvelopeVerdict v;
    v.z = z;
    v.allowance = allowance;
    v.bias_budget = de.bias_budget();
    const std::size_t m = de.x.size();
    v.points.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        EnvelopePoint& p = v.points[i];
        p.x = de.x[i];
        p.kde = de.value[i];
        p.stderr_ = de.stderr_[i];
        const DensityEnvelope e = envelope_density(p.x, ep);
        p.lower = e.lower;
        p.upper = e.upper;
        const double slack = z * p.stderr_ + v.bias_budget;
        const double lower = absdev_stderr > 0.0 ? envelope_density(p.x, lo_ep).lower : p.lower;
        const double upper = absdev_stderr > 0.0 ? envelope_density(p.x, hi_ep).upper : p.upper;
        p.margin = std::min(p.kde - (lower - slack), (upper + slack) - p.kde);
        p.pass = p.margin >= 0.0;
        const double left = i > 0 ? 0.5 * (de.x[i] - de.x[i - 1]) : 0.0;
        const double right = i + 1 < m ? 0.5 * (de.x[i + 1] - de.x[i]) : 0.0;
        v.window_measure += left + right;
        if (!p.pass) v.violation_measure += left + right;
    }
    v.pass = v.violation_measure <= allowance * v.window_measure;
    return v;
}

std::string_view to_string(TailOutcome o) noexcept {
    switch (o) {
        case TailOutcome::pass: return "pass";
        case TailOutcome::fail: return "fail";
        case TailOutcome::inconclusive: return "inconclusive";
        case TailOutcome::not_applicable: return "not_applicable";
    }
    return "pass";
}

double clopper_pearson_upper(std::size_t k, std::size_t n, double confidence) {
    if (n == 0 || k >= n) return 1.0;
    return boost::math::ibeta_inv(static_cast<double>(k + 1), static_cast<double>(n - k), confidence);
}

double clopper_pearson_lower(std::size_t k, std::size_t n, double confidence) {
    if (k == 0) return 0.0;
    return boost::math::ibeta_inv(static_cast<double>(k), static_cast<double>(n - k + 1), 1.0 - confidence);
}

std::vector<TailProbe> check_tails(std::span<const double> samples, double mean, double L,
                                   const std::vector<double>& probes, double confidence) {
    std::vector<TailProbe> out;
    for (double x : probes) {
        if (!(x > 0.0)) throw ArgumentError("tail probes must be positive");
        for (TailSide side : {TailSide::upper, TailSide::lower}) {
            TailProbe tp;
            tp.x = x;
            tp.side = side;
            tp.n = samples.size();
            tp.count = static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [&](double s) {
                return side == TailSide::upper ? s >= x : s <= -x;
            }));
            tp.empirical = tp.n ? static_cast<double>(tp.count) / static_cast<double>(tp.n) : 0.0;
            tp.ci_lower = clopper_pearson_lower(tp.count, tp.n, confidence);
            tp.ci_upper = clopper_pearson_upper(tp.count, tp.n, confidence);
            tp.bound = tail_bound(x, mean, L, side);
            const bool applicable = side == TailSide::upper ? x > mean : x > -mean;
            if (!applicable) {
                tp.outcome = TailOutcome::not_applicable;
            } else if (tp.ci_upper <= tp.bound) {
                tp.outcome = TailOutcome::pass;
            } else if (tp.ci_lower > tp.bound) {
                tp.outcome = TailOutcome::fail;
            } else {
                tp.outcome = TailOutcome::inconclusive;
            }
            out.push_back(tp);
        }
    }
    return out;
}

MalliavinInterval malliavin_interval(Component c, double t, const BoundConstants& bc) {
    const double down = std::exp(-bc.M_psi * t);
    const double up = std::exp(bc.M_psi * t);
    switch (c) {
        case Component::X: return {bc.nu * down, bc.mu * up};
        case Component::Y: return {(bc.m ? bc.m(t) : 0.0) * bc.nu * down, bc.M1 * bc.mu * up};
        case Component::Z: return {bc.nu * bc.nu * (bc.rho ? bc.rho(t) : 0.0) * down, bc.mu * bc.gamma * up};
    }
    return {};
}

MalliavinBoundResult check_malliavin_bounds(const PathSet& ps, const BoundConstants& bc, Component c, int sign,
                                            Representation rep, double threshold) {
    MalliavinBoundResult res;
    res.component = c;
    res.representation = rep;
    res.threshold = threshold;
    const double s = sign < 0 ? -1.0 : 1.0;
    for (std::size_t q = 0; q < ps.pairs.size(); ++q) {
        const MalliavinPair& mp = ps.pairs[q];
        if (mp.step_r > mp.step_t || mp.step_t == 0) continue;
        const MalliavinInterval iv = malliavin_interval(c, mp.t, bc);
        const auto d = ps.malliavin(c, rep, q);
        const auto tol = ps.tolerance(c, q);
        for (std::size_t i = 0; i < ps.n_paths; ++i) {
            if (ps.exited[i]) continue;
            const double v = c == Component::X ? d[i] : s * d[i];
            const double slack = tol[i] + 1e-12 * std::max(1.0, std::abs(v));
            ++res.samples;
            if (v >= iv.lower - slack && v <= iv.upper + slack) {
                ++res.inside;
            } else {
                const double scale = std::max(iv.upper, 1e-300);
                const double excess = v < iv.lower ? (iv.lower - v) / scale : (v - iv.upper) / scale;
                res.worst_excess = std::max(res.worst_excess, excess);
            }
        }
    }
    res.fraction = res.samples ? static_cast<double>(res.inside) / static_cast<double>(res.samples) : 1.0;
    res.pass = res.fraction >= threshold;
    return res;
}

}  // namespace fbsde
