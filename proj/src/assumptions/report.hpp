// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "assumptions/region.hpp"
#include "coeffs/expr.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fbsde {

enum class CheckStatus { pass, fail, not_checkable };
std::string_view to_string(CheckStatus s) noexcept;

/// Which estimate the assumptions are checked for.
enum class CheckMode { x_only, y, z };
std::string_view to_string(CheckMode m) noexcept;
CheckMode check_mode_from_string(std::string_view s);

/// Sign alternative selected by the monotonicity check on g.
enum class SignMode { none, increasing, decreasing };
std::string_view to_string(SignMode m) noexcept;

/// A sample point reproducing a failed inequality, with the offending value.
struct Witness {
    Point at;
    double value = 0.0;
};

struct CheckResult {
    std::string id;
    std::string statement;
    CheckStatus status = CheckStatus::pass;
    std::optional<Witness> witness;
    std::vector<std::pair<std::string, double>> values;  ///< named estimates, in emission order
    std::string note;

    /// Throws ArgumentError when `key` was not recorded.
    double value(std::string_view key) const;
    bool has(std::string_view key) const noexcept;
};

struct AssumptionReport {
    CheckMode mode = CheckMode::x_only;
    Region region;
    double beta = 0.5;
    double strict_epsilon = 1e-8;
    std::vector<CheckResult> checks;
    std::vector<std::string> warnings;

    double nu = 0.0;  ///< sampled inf sigma
    double mu = 0.0;  ///< sampled sup sigma
    std::optional<double> c1, c2;
    std::optional<double> alpha;
    std::optional<double> dg_inf, dg_sup;  ///< inf / sup of d_x g
    std::optional<double> dxxg_inf;        ///< inf of d_xx g
    std::optional<std::array<double, 5>> psi_min;
    SignMode sign = SignMode::none;
    std::optional<double> gamma;  ///< sup of u_x sigma_x + u_x^2 sigma_u + u_xx sigma on the solved grid

    /// True when no requested check failed (not-checkable items do not count).
    bool passed() const noexcept;
    const CheckResult* find(std::string_view id) const noexcept;
    /// True when `id` was checked and passed.
    bool passed(std::string_view id) const noexcept;
    std::vector<std::string> failed_ids() const;
};

}  // namespace fbsde
