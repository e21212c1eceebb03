#pragma once

#include <iosfwd>

#include <json.hpp>

#include "qho/app/run_config.hpp"

namespace qho::app {

enum ExitCode : int {
    kExitOk = 0,
    kExitOther = 1,
    kExitValidationFailed = 2,
    kExitConfigError = 3,
    kExitResonanceOrDomain = 4,
};

// Each command takes a resolved config, writes its files under cfg.out and
// returns the JSON summary it wrote. Errors propagate as qho::Error.
nlohmann::json cmd_analyze(const RunConfig& cfg);
nlohmann::json cmd_simulate(const RunConfig& cfg);
nlohmann::json cmd_sweep(const RunConfig& cfg);
// The report carries "passed"; a failed check is not an exception.
nlohmann::json cmd_validate(const RunConfig& cfg);

// Maps the current exception to an exit code and prints a diagnostic to err.
int report_exception(std::ostream& err);

}  // namespace qho::app
