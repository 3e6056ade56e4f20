// SPDX-License-Identifier: Apache-2.0
#include "assumptions/report.hpp"

#include "common/error.hpp"

namespace fbsde {

std::string_view to_string(CheckStatus s) noexcept {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::not_checkable: return "not-checkable";
    }
    return "fail";
}

std::string_view to_string(CheckMode m) noexcept {
    switch (m) {
        case CheckMode::x_only: return "X";
        case CheckMode::y: return "Y";
        case CheckMode::z: return "Z";
    }
    return "X";
}

CheckMode check_mode_from_string(std::string_view s) {
    if (s == "X" || s == "x" || s == "X-only") return CheckMode::x_only;
    if (s == "Y" || s == "y") return CheckMode::y;
    if (s == "Z" || s == "z") return CheckMode::z;
    throw ArgumentError("unknown check mode '" + std::string(s) + "' (expected X, Y or Z)");
}

std::string_view to_string(SignMode m) noexcept {
    switch (m) {
        case SignMode::none: return "none";
        case SignMode::increasing: return "increasing";
        case SignMode::decreasing: return "decreasing";
    }
    return "none";
}

double CheckResult::value(std::string_view key) const {
    for (const auto& [k, v] : values) {
        if (k == key) return v;
    }
    throw ArgumentError("check " + id + " has no value '" + std::string(key) + "'");
}

bool CheckResult::has(std::string_view key) const noexcept {
    for (const auto& kv : values) {
        if (kv.first == key) return true;
    }
    return false;
}

bool AssumptionReport::passed() const noexcept {
    for (const auto& c : checks) {
        if (c.status == CheckStatus::fail) return false;
    }
    return true;
}

const CheckResult* AssumptionReport::find(std::string_view id) const noexcept {
    for (const auto& c : checks) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

bool AssumptionReport::passed(std::string_view id) const noexcept {
    const CheckResult* c = find(id);
    return c != nullptr && c->status == CheckStatus::pass;
}

std::vector<std::string> AssumptionReport::failed_ids() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (c.status == CheckStatus::fail) out.push_back(c.id);
    }
    return out;
}

}  // namespace fbsde
