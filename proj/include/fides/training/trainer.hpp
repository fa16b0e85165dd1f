#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fides/neural/network.hpp"
#include "fides/problems/problem.hpp"
#include "fides/training/config.hpp"
#include "fides/training/loss.hpp"

namespace fides::train {

enum class StopReason { MaxIters, Plateau, Diverged };
std::string to_string(StopReason r);

struct TrainReport {
  std::string case_id;
  std::vector<double> loss_history;
  double final_phi = 0.0;
  double final_phi_res = 0.0;
  double final_phi_bc = 0.0;
  double final_phi_data = 0.0;
  double w_res = 1.0;
  double w_bc = 1.0;
  double w_data = 0.0;
  double mse_vs_exact = 0.0;
  double rel_l2_vs_exact = 0.0;
  double max_abs_err = 0.0;
  int iterations_run = 0;
  StopReason stop_reason = StopReason::MaxIters;
  std::optional<std::map<std::string, double>> recovered_unknowns;
  int clamp_events = 0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> layer_sizes;
  std::string message;  // set when training diverged
};

struct TrainResult {
  TrainReport report;
  nn::Network network;
};

/// True when (max - min) / mean of the last `window` entries falls below `threshold`.
bool plateau_reached(const std::vector<double>& history, int window, double threshold);

std::vector<int> network_sizes(const problems::Problem& problem, const TrainConfig& config);

TrainResult train_forward(const problems::Problem& problem, const TrainConfig& config);

/// Fits the network and the named operator orders jointly against `data`.
TrainResult train_inverse(const problems::Problem& problem, const InverseDataset& data,
                          const problems::OrderMap& initial_orders, const TrainConfig& config);

}  // namespace fides::train
