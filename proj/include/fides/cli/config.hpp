#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fides/training/config.hpp"

namespace fides::cli {

/// Every field is optional so that layers (case defaults < file < flags) can be merged field by field.
struct RunConfig {
  std::optional<std::string> case_id;
  std::optional<int> n;
  std::optional<int> layers;
  std::optional<int> neurons;
  std::optional<int> iters;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_std;
  std::optional<std::vector<train::LrStage>> schedule;
  std::optional<int> plateau_window;
  std::optional<double> plateau_threshold;
  std::optional<double> beta;         // C6 / C7 derivative order of the case itself
  std::optional<double> init_alpha;   // inverse-mode starting orders
  std::optional<double> init_beta;
  std::optional<std::string> out;
  std::optional<std::string> vary;    // sensitivity: layers | neurons
  std::optional<std::vector<int>> values;
  std::optional<bool> emit_solution;
  std::optional<bool> emit_loss;
  std::optional<bool> emit_report;
};

/// Fields set in `over` replace those in `base`.
RunConfig merge(const RunConfig& base, const RunConfig& over);

/// Flat `key = value` or `key: value` lines; `#` starts a comment. Unknown keys are errors.
RunConfig parse_config_text(std::string_view text);
RunConfig load_config_file(const std::filesystem::path& path);

/// "0:1e-2,12000:1e-3" style schedule.
std::vector<train::LrStage> parse_schedule(std::string_view text);
std::vector<int> parse_int_list(std::string_view text);

}  // namespace fides::cli
