#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "levyfdt/model.hpp"
#include "levyfdt/response.hpp"
#include "levyfdt/simulate.hpp"

namespace levyfdt::cli {

enum ExitCode : int { kPass = 0, kVerifyFailed = 1, kUsage = 2, kNumerical = 3 };

/// Run the command line in-process. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            char** envp = nullptr);

// Builders from a resolved configuration; throw ConfigError on bad names.
SdeModel build_model(const ScenarioConfig& cfg);
Perturbation build_perturbation(const ScenarioConfig& cfg);
std::vector<Observable> build_observables(const ScenarioConfig& cfg);
ResponseSpec build_response_spec(const ScenarioConfig& cfg);
VerifyConfig build_verify_config(const ScenarioConfig& cfg);

}  // namespace levyfdt::cli
