#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fides/cli/config.hpp"
#include "fides/problems/problem.hpp"
#include "fides/training/config.hpp"

namespace fides::cli {

/// Exit codes: 0 success, 1 training failed (artifacts still written), 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTrainingFailed = 1;
inline constexpr int kExitUsage = 2;

/// Case defaults overlaid with the run configuration.
train::TrainConfig training_config(const problems::Problem& problem, const RunConfig& cfg);
problems::CaseOptions case_options(const RunConfig& cfg);

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep_n(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sensitivity(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_inverse(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_list_cases(std::ostream& out);

/// Full command-line entry point; args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fides::cli
