// SPDX-License-Identifier: Apache-2.0
#include "assumptions/report_json.hpp"

#include <cmath>

namespace fbsde {

using nlohmann::json;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const Region& r) {
    return {{"t", {r.t_lo, r.t_hi}}, {"x", {r.x_lo, r.x_hi}}, {"u_bound", r.u_bound}, {"p_bound", r.p_bound},
            {"samples", {{"t", r.nt}, {"x", r.nx}, {"u", r.nu}, {"p", r.np}}}};
}

json to_json(const AssumptionReport& rep) {
    json checks = json::array();
    for (const CheckResult& c : rep.checks) {
        json values = json::object();
        for (const auto& [k, v] : c.values) values[k] = finite_or_null(v);
        json item = {{"id", c.id},
                     {"statement", c.statement},
                     {"status", std::string(to_string(c.status))},
                     {"values", values},
                     {"note", c.note}};
        if (c.witness) {
            item["witness"] = {{"t", c.witness->at.t},
                               {"x", c.witness->at.x},
                               {"u", c.witness->at.u},
                               {"p", c.witness->at.p},
                               {"value", finite_or_null(c.witness->value)}};
        } else {
            item["witness"] = nullptr;
        }
        checks.push_back(std::move(item));
    }
    const auto opt = [](const std::optional<double>& v) { return v ? finite_or_null(*v) : json(nullptr); };
    json psi = nullptr;
    if (rep.psi_min) psi = json(std::vector<double>(rep.psi_min->begin(), rep.psi_min->end()));
    return {{"mode", std::string(to_string(rep.mode))},
            {"passed", rep.passed()},
            {"failed", rep.failed_ids()},
            {"region", to_json(rep.region)},
            {"beta", rep.beta},
            {"strict_epsilon", rep.strict_epsilon},
            {"checks", checks},
            {"warnings", rep.warnings},
            {"constants",
             {{"nu", finite_or_null(rep.nu)},
              {"mu", finite_or_null(rep.mu)},
              {"c1", opt(rep.c1)},
              {"c2", opt(rep.c2)},
              {"alpha", opt(rep.alpha)},
              {"dg_inf", opt(rep.dg_inf)},
              {"dg_sup", opt(rep.dg_sup)},
              {"dxxg_inf", opt(rep.dxxg_inf)},
              {"psi_min", psi},
              {"gamma", opt(rep.gamma)}}},
            {"sign", std::string(to_string(rep.sign))}};
}

}  // namespace fbsde
