#pragma once

#include <json.hpp>

#include "qho/app/run_config.hpp"

namespace qho::app {

// Dimensional and dimensionless forms of the scheme side by side.
nlohmann::json scheme_summary(const RunConfig& cfg);

// limiting_sigma with the offending tau_M in the resonance diagnostic.
double checked_limiting_sigma(const RunConfig& cfg);

}  // namespace qho::app
