// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "assumptions/report.hpp"

#include <json.hpp>

namespace fbsde {

/// Non-finite numbers become null.
nlohmann::json finite_or_null(double v);

nlohmann::json to_json(const Region& r);
nlohmann::json to_json(const AssumptionReport& rep);

}  // namespace fbsde
