#pragma once

#include <string>
#include <vector>

#include "qdob/serialization.hpp"

namespace qdob::cli {

// schema diagnostics; empty result means the config is runnable
std::vector<std::string> validate_config(const json& config);

// executes one experiment and returns the report; throws on input errors
json run_experiment(const json& config, const std::string& out_dir);

// true when every inequality check inside a report passed
bool report_all_passed(const json& report);

// full command-line entry point; exit codes: 0 ok, 1 input error,
// 2 inequality failure
int run_main(int argc, char** argv);

}  // namespace qdob::cli
