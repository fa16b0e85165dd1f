#pragma once

#include <cstdint>
#include <vector>

namespace fides::train {

struct LrStage {
  int start_iter = 0;
  double lr = 1e-2;
};

/// 1e-2 for the first 40% of the budget, 1e-3 until 80%, 1e-4 afterwards.
std::vector<LrStage> default_schedule(int max_iters);

struct TrainConfig {
  int max_iters = 30000;
  int plateau_window = 20;
  double plateau_threshold = 1e-3;
  std::vector<LrStage> lr_schedule;  // empty: default_schedule(max_iters)
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 42;
  double w_res = 1.0;
  double w_bc = 1.0;
  double w_data = 1.0;               // inverse mode only
  std::vector<int> hidden_layers;    // empty: the case default
  double order_fd_step = 1e-4;

  /// Throws ConfigError on a window below 2, negative or increasing rates, or non-positive weights.
  void validate() const;
  std::vector<LrStage> schedule() const;
};

/// Rate in force at `iter` (0-based) under a validated schedule.
double learning_rate(const std::vector<LrStage>& schedule, int iter);

}  // namespace fides::train
