// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "verify/checks.hpp"

#include <string>

namespace fbsde {

/// Overlay of the KDE (with a z * stderr band) against the two envelope curves.
std::string overlay_svg(const EnvelopeVerdict& v, const std::string& title);

/// Columns x, kde, stderr, lower, upper, pass.
std::string overlay_csv(const EnvelopeVerdict& v);

}  // namespace fbsde
