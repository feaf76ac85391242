#pragma once

#include <string>

#include "aivgt/aiv_search.hpp"

namespace aivgt {

/// Versioned machine-readable report; every pair carries enough
/// diagnostics (tau, epsilon, betas, delta, p-value) to recompute lambda.
std::string report_to_json(const EstimateReport& report);

}  // namespace aivgt
