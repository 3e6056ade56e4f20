// SPDX-License-Identifier: Apache-2.0
#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. 2011). Every draw
// is a pure function of (key, counter), so any path or resample can be
// regenerated in isolation and results do not depend on thread scheduling.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fbsde {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Stream of draws keyed by a 64-bit seed and addressed by (stream, index, domain).
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    /// Standard normal pair via Box-Muller.
    std::array<double, 2> normal_pair(std::uint64_t stream, std::uint64_t index,
                                      std::uint32_t domain = 0) const noexcept {
        const auto w = raw(stream, index, domain);
        const double u1 = to_open_closed(w[0], w[1]);
        const double u2 = to_closed_open(w[2], w[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(angle), r * std::sin(angle)};
    }

    double normal(std::uint64_t stream, std::uint64_t index, std::uint32_t domain = 0) const noexcept {
        return normal_pair(stream, index, domain)[0];
    }

    /// Uniform integer in [0, n) by 64-bit multiply-shift (bias below n / 2^64).
    std::uint64_t below(std::uint64_t n, std::uint64_t stream, std::uint64_t index,
                        std::uint32_t domain = 0) const noexcept {
        const auto w = raw(stream, index, domain);
        const std::uint64_t bits = (std::uint64_t{w[0]} << 32) | w[1];
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
    }

    Philox4x32::Counter raw(std::uint64_t stream, std::uint64_t index,
                            std::uint32_t domain) const noexcept {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index),
                                      static_cast<std::uint32_t>(stream),
                                      static_cast<std::uint32_t>(stream >> 32),
                                      domain ^ static_cast<std::uint32_t>(index >> 32) * 0x9E3779B9u};
        return Philox4x32::block(ctr, key_);
    }

private:
    static double to_closed_open(std::uint32_t a, std::uint32_t b) noexcept {
        const std::uint64_t bits = ((std::uint64_t{a} << 32) | b) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }
    static double to_open_closed(std::uint32_t a, std::uint32_t b) noexcept {
        const std::uint64_t bits = ((std::uint64_t{a} << 32) | b) >> 11;
        return static_cast<double>(bits + 1) * 0x1.0p-53;
    }

    Philox4x32::Key key_;
};

}  // namespace fbsde
