#pragma once
// Config-driven experiment runner: executes the declared check suites in
// dependency order, writes tables/clouds/reports plus a hashed manifest.
// Exit contract: 0 all checks passed, 2 at least one check failed,
// 1 configuration or runtime error.

#include <string>
#include <vector>

#include "nrds/config.hpp"

namespace nrds {

struct CheckResult {
    std::string suite;
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string note;
};

struct RunResult {
    std::vector<CheckResult> checks;
    std::vector<std::string> files;
    int exit_code = 1;
};

RunResult run_experiment(const ExperimentConfig& cfg);

std::string scenario_listing();

}  // namespace nrds
