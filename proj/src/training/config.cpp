#include "fides/training/config.hpp"

#include <cmath>
#include <string>

#include "fides/errors.hpp"

namespace fides::train {

std::vector<LrStage> default_schedule(int max_iters) {
  const int a = static_cast<int>(std::floor(0.4 * max_iters));
  const int b = static_cast<int>(std::floor(0.8 * max_iters));
  std::vector<LrStage> out;
  for (LrStage s : {LrStage{0, 1e-2}, LrStage{a, 1e-3}, LrStage{b, 1e-4}}) {
    if (!out.empty() && out.back().start_iter == s.start_iter) out.pop_back();
    out.push_back(s);
  }
  return out;
}

void TrainConfig::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (plateau_window < 2) throw ConfigError("plateau_window must be >= 2");
  if (!(plateau_threshold >= 0.0)) throw ConfigError("plateau_threshold must be >= 0");
  if (!(w_res > 0.0) || !(w_bc > 0.0) || !(w_data > 0.0)) throw ConfigError("loss weights must be positive");
  if (!(order_fd_step > 0.0)) throw ConfigError("order finite-difference step must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_epsilon > 0.0)) {
    throw ConfigError("Adam hyperparameters out of range");
  }
  for (int h : hidden_layers) {
    if (h < 1) throw ConfigError("hidden layer widths must be >= 1");
  }
  const auto s = schedule();
  if (s.front().start_iter != 0) throw ConfigError("learning-rate schedule must start at iteration 0");
  for (std::size_t i = 0; i < s.size(); ++i) {
    // Zero is allowed: it freezes the parameters, which the stopping-rule checks rely on.
    if (!(s[i].lr >= 0.0) || !std::isfinite(s[i].lr)) throw ConfigError("learning rates must be finite and >= 0");
    if (i > 0 && s[i].start_iter <= s[i - 1].start_iter) {
      throw ConfigError("learning-rate stages must have strictly increasing start iterations");
    }
    if (i > 0 && s[i].lr > s[i - 1].lr) throw ConfigError("learning rates must be non-increasing");
  }
}

std::vector<LrStage> TrainConfig::schedule() const {
  return lr_schedule.empty() ? default_schedule(max_iters) : lr_schedule;
}

double learning_rate(const std::vector<LrStage>& schedule, int iter) {
  double lr = schedule.front().lr;
  for (const auto& s : schedule) {
    if (iter >= s.start_iter) lr = s.lr;
  }
  return lr;
}

}  // namespace fides::train
