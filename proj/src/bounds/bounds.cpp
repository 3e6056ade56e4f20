// SPDX-License-Identifier: Apache-2.0
#include "bounds/bounds.hpp"

#include "common/error.hpp"
#include "common/format.hpp"

#include <cmath>

namespace fbsde {
namespace {

void require_time(double t) {
    if (!(t > 0.0)) throw ArgumentError("time must be positive, got " + format_double(t));
}

}  // namespace

double sample_gamma(const DrivingCoefficients& dc, double x_lo, double x_hi) {
    const PdeSolution* sol = dc.solution();
    if (!sol) throw ArgumentError("gamma needs a coupled driving set");
    const Grid& grid = sol->grid();
    const auto [j0, j1] = sol->trusted_nodes(x_lo, x_hi);
    double gamma = 0.0;
    for (int k = 0; k <= grid.K; ++k) {
        for (int j = j0; j <= j1; ++j) {
            const DrivingValues v = dc.evaluate(grid.t(k), grid.x(j), DrivingDetail::first_order);
            gamma = std::max(gamma, std::abs(v.ux * v.sigma_x + v.uxx * v.sigma));
        }
    }
    return gamma;
}

VariancePair x_constants(double t, const BoundConstants& bc) {
    require_time(t);
    return {t * bc.nu * bc.nu * std::exp(-2.0 * bc.M_psi * t), t * bc.mu * bc.mu * std::exp(2.0 * bc.M_psi * t)};
}

VariancePair y_constants(double t, const BoundConstants& bc) {
    require_time(t);
    const double m = bc.m ? bc.m(t) : 0.0;
    if (!(m > 0.0)) {
        throw RefusedError("Y envelope refused: m(" + format_double(t) + ") = " + format_double(m) +
                           " is not positive; see check A5");
    }
    const double lo = m * bc.nu * std::exp(-bc.M_psi * t);
    const double hi = bc.M1 * bc.mu * std::exp(bc.M_psi * t);
    return {t * lo * lo, t * hi * hi};
}

VariancePair z_constants(double t, const BoundConstants& bc) {
    require_time(t);
    const double rho = bc.rho ? bc.rho(t) : 0.0;
    if (!(rho > 0.0)) {
        throw RefusedError("Z envelope refused: rho(" + format_double(t) + ") = " + format_double(rho) +
                           " is not positive; see check A8");
    }
    const double nu2 = bc.nu * bc.nu;
    return {t * nu2 * nu2 * rho * rho * std::exp(-2.0 * bc.M_psi * t),
            t * bc.mu * bc.mu * bc.gamma * bc.gamma * std::exp(2.0 * bc.M_psi * t)};
}

void EnvelopeParams::validate() const {
    if (!(l > 0.0) || !(L >= l) || !std::isfinite(L)) {
        throw ArgumentError("envelope needs 0 < l <= L, got l=" + format_double(l) + ", L=" + format_double(L));
    }
    if (!(absdev >= 0.0) || !std::isfinite(mean)) throw ArgumentError("envelope needs finite mean and absdev >= 0");
}

DensityEnvelope envelope_density(double x, const EnvelopeParams& ep) {
    const double d2 = (x - ep.mean) * (x - ep.mean);
    return {ep.absdev / (2.0 * ep.L) * std::exp(-d2 / (2.0 * ep.l)),
            ep.absdev / (2.0 * ep.l) * std::exp(-d2 / (2.0 * ep.L))};
}

std::string_view to_string(TailSide s) noexcept { return s == TailSide::upper ? "upper" : "lower"; }

double tail_bound(double x, double mean, double L, TailSide side) {
    if (!(x > 0.0)) throw ArgumentError("tail bound needs x > 0, got " + format_double(x));
    if (!(L > 0.0)) throw ArgumentError("tail bound needs L > 0");
    const double d = side == TailSide::upper ? x - mean : x + mean;
    return std::exp(-d * d / (2.0 * L));
}

std::string envelope_csv(const std::vector<double>& xs, const EnvelopeParams& ep) {
    CsvWriter csv({"x", "lower", "upper"});
    for (double x : xs) {
        const DensityEnvelope e = envelope_density(x, ep);
        csv.cell(x).cell(e.lower).cell(e.upper);
        csv.end_row();
    }
    return csv.str();
}

}  // namespace fbsde
