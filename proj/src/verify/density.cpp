// SPDX-License-Identifier: Apache-2.0
#include "verify/density.hpp"

#include "common/error.hpp"
#include "common/format.hpp"
#include "common/parallel.hpp"
#include "common/philox.hpp"
#include "common/summation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fbsde {
namespace {

constexpr std::uint32_t kBootstrapDomain = 0xB0075u;
constexpr double kKernelReach = 8.0;
constexpr std::size_t kMaxBins = std::size_t{1} << 18;

struct Lattice {
    double origin = 0.0;
    double step = 0.0;
    std::size_t size = 0;
};

// Linear binning: each sample splits unit weight between its two lattice neighbours.
void bin(std::span<const double> samples, const Lattice& lat, std::span<const std::uint64_t> index,
         std::vector<double>& weights) {
    std::fill(weights.begin(), weights.end(), 0.0);
    const auto add = [&](double v) {
        const double pos = (v - lat.origin) / lat.step;
        const auto i = std::min(static_cast<std::size_t>(pos), lat.size - 2);
        const double frac = pos - static_cast<double>(i);
        weights[i] += 1.0 - frac;
        weights[i + 1] += frac;
    };
    if (index.empty()) {
        for (double v : samples) add(v);
    } else {
        for (std::uint64_t i : index) add(samples[i]);
    }
}

enum class Kernel { value, second };

// Sum of w_i K_h(x - node_i) over the lattice nodes within the kernel reach.
double smooth(const Lattice& lat, double h, const std::vector<double>& w, double x, Kernel kind) {
    const double pos = (x - lat.origin) / lat.step;
    const double reach = kKernelReach * h / lat.step;
    const long lo = std::max(0L, static_cast<long>(std::floor(pos - reach)));
    const long hi = std::min(static_cast<long>(lat.size) - 1, static_cast<long>(std::ceil(pos + reach)));
    const double c = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
    double s = 0.0;
    for (long i = lo; i <= hi; ++i) {
        const double wi = w[static_cast<std::size_t>(i)];
        if (wi == 0.0) continue;
        const double z = (x - (lat.origin + static_cast<double>(i) * lat.step)) / h;
        const double k = c * std::exp(-0.5 * z * z);
        s += wi * (kind == Kernel::value ? k : k * (z * z - 1.0) / (h * h));
    }
    return s;
}

}  // namespace

std::string_view to_string(BandwidthRule r) noexcept { return r == BandwidthRule::fixed ? "fixed" : "silverman"; }

BandwidthRule bandwidth_rule_from_string(std::string_view s) {
    if (s == "silverman") return BandwidthRule::silverman;
    if (s == "fixed") return BandwidthRule::fixed;
    throw ArgumentError("unknown bandwidth rule '" + std::string(s) + "'");
}

double DensityEstimate::integral() const {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (value[i] + value[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

double silverman_bandwidth(std::span<const double> samples) {
    const double mean = mean_of(samples);
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = (samples[i] - mean) * (samples[i] - mean);
    const double sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(samples.size() - 1));
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto q = [&](double p) { return sorted[static_cast<std::size_t>(p * static_cast<double>(sorted.size() - 1))]; };
    const double iqr = q(0.75) - q(0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

DensityEstimate estimate_density(std::span<const double> samples, double lo, double hi, const DensityOptions& opt) {
    const std::size_t n = samples.size();
    if (n < opt.min_samples) {
        throw ArgumentError("density estimate needs at least " + std::to_string(opt.min_samples) + " samples, got " +
                            std::to_string(n));
    }
    if (!(hi > lo) || opt.grid_points < 2) throw ArgumentError("density window must satisfy lo < hi");
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    if (!std::isfinite(*mn) || !std::isfinite(*mx)) throw ArgumentError("non-finite sample");
    {
        const double mean = mean_of(samples);
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) sq[i] = (samples[i] - mean) * (samples[i] - mean);
        if (pairwise_sum(sq) / static_cast<double>(n - 1) < 1e-12) {
            throw ArgumentError("degenerate sample (variance below 1e-12)");
        }
    }

    DensityEstimate de;
    de.n = n;
    de.bandwidth = opt.rule == BandwidthRule::fixed ? opt.bandwidth : silverman_bandwidth(samples);
    if (!(de.bandwidth > 0.0)) throw ArgumentError("bandwidth must be positive, got " + format_double(de.bandwidth));
    const double h = de.bandwidth;

    Lattice lat;
    lat.origin = *mn;
    const double span = std::max(*mx - *mn, h);
    lat.size = std::min(kMaxBins, static_cast<std::size_t>(std::ceil(span / (h / 32.0))) + 2);
    lat.step = span / static_cast<double>(lat.size - 2);

    const std::size_t m = static_cast<std::size_t>(opt.grid_points);
    de.x.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        de.x[i] = i + 1 == m ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
    }
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> w(lat.size);
    bin(samples, lat, {}, w);
    de.value.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        de.value[i] = smooth(lat, h, w, de.x[i], Kernel::value) * inv_n;
        de.curvature = std::max(de.curvature, 0.5 * std::abs(smooth(lat, h, w, de.x[i], Kernel::second) * inv_n));
    }

    const std::size_t B = static_cast<std::size_t>(std::max(opt.bootstrap, 0));
    std::vector<double> boot(B * m);
    const CounterRng rng(opt.seed);
    parallel_for(B, opt.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> index(n);
        std::vector<double> wb(lat.size);
        for (std::size_t b = begin; b < end; ++b) {
            for (std::size_t i = 0; i < n; ++i) index[i] = rng.below(n, b, i, kBootstrapDomain);
            bin(samples, lat, index, wb);
            for (std::size_t i = 0; i < m; ++i) boot[b * m + i] = smooth(lat, h, wb, de.x[i], Kernel::value) * inv_n;
        }
    });
    de.stderr_.assign(m, 0.0);
    if (B > 1) {
        std::vector<double> col(B);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t b = 0; b < B; ++b) col[b] = boot[b * m + i];
            const double mean = mean_of(col);
            for (double& c : col) c = (c - mean) * (c - mean);
            de.stderr_[i] = std::sqrt(pairwise_sum(col) / static_cast<double>(B - 1));
        }
    }
    return de;
}

}  // namespace fbsde
