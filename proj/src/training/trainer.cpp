#include "fides/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fides/errors.hpp"
#include "fides/problems/metrics.hpp"
#include "fides/training/adam.hpp"

namespace fides::train {

using Eigen::VectorXd;

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIters: return "MaxIters";
    case StopReason::Plateau: return "Plateau";
    case StopReason::Diverged: return "Diverged";
  }
  return "?";
}

bool plateau_reached(const std::vector<double>& history, int window, double threshold) {
  if (window < 2 || history.size() < static_cast<std::size_t>(window)) return false;
  const auto first = history.end() - window;
  const auto [lo, hi] = std::minmax_element(first, history.end());
  double sum = 0.0;
  for (auto it = first; it != history.end(); ++it) sum += *it;
  const double mean = sum / window;
  if (*hi == *lo) return true;
  return (*hi - *lo) / mean < threshold;
}

std::vector<int> network_sizes(const problems::Problem& problem, const TrainConfig& config) {
  const auto& spec = problem.spec();
  std::vector<int> sizes{spec.input_dims};
  const auto& hidden = config.hidden_layers.empty() ? spec.hidden_layers : config.hidden_layers;
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(spec.output_dims);
  return sizes;
}

namespace {

using Clock = std::chrono::steady_clock;

void finish(TrainReport& rep, const problems::Problem& problem, const nn::Network& net, const LossAssembler& loss,
            const problems::OrderMap& orders, Clock::time_point t0) {
  const auto parts = loss.evaluate(problems::network_evaluator(net), orders);
  rep.final_phi = parts.phi;
  rep.final_phi_res = parts.phi_res;
  rep.final_phi_bc = parts.phi_bc;
  rep.final_phi_data = parts.phi_data;
  if (!std::isfinite(parts.phi) && rep.stop_reason != StopReason::Diverged) {
    rep.stop_reason = StopReason::Diverged;
    rep.message = "final loss is not finite";
  }
  if (problem.spec().has_exact) {
    const auto pts = problem.collocation_points();
    const auto m = problems::compute_metrics(net.forward(pts), problem.exact(pts));
    rep.mse_vs_exact = m.mse;
    rep.rel_l2_vs_exact = m.rel_l2;
    rep.max_abs_err = m.max_abs_err;
  }
  rep.iterations_run = static_cast<int>(rep.loss_history.size());
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

TrainReport start_report(const problems::Problem& problem, const TrainConfig& config, const std::vector<int>& sizes) {
  TrainReport rep;
  rep.case_id = problems::to_string(problem.spec().id);
  rep.seed = config.seed;
  rep.w_res = config.w_res;
  rep.w_bc = config.w_bc;
  rep.layer_sizes = sizes;
  rep.loss_history.reserve(static_cast<std::size_t>(config.max_iters));
  return rep;
}

}  // namespace

TrainResult train_forward(const problems::Problem& problem, const TrainConfig& config) {
  config.validate();
  const auto t0 = Clock::now();
  const auto sizes = network_sizes(problem, config);
  nn::Network net = nn::init_network(sizes, config.seed);
  const auto orders = problem.resolve_orders({});
  const LossAssembler loss(problem, config.w_res, config.w_bc);
  const auto schedule = config.schedule();

  TrainReport rep = start_report(problem, config, sizes);
  VectorXd theta = net.parameters();
  auto adam = AdamState::zeros(theta.size(), config.adam_beta1, config.adam_beta2, config.adam_epsilon);
  const nn::LossEvaluator eval = [&](std::span<const nn::DerivBundle> b, std::span<nn::BundleAdjoint> adj) {
    return loss.evaluate(b, orders, adj).phi;
  };

  for (int it = 0; it < config.max_iters; ++it) {
    nn::GradientResult g;
    try {
      g = nn::param_gradient(net, loss.requests(), eval);
    } catch (const NonFiniteError& e) {
      rep.stop_reason = StopReason::Diverged;
      rep.message = e.what();
      break;
    }
    rep.loss_history.push_back(g.loss);
    if (plateau_reached(rep.loss_history, config.plateau_window, config.plateau_threshold)) {
      rep.stop_reason = StopReason::Plateau;
      break;
    }
    adam_step(adam, theta, g.gradient, learning_rate(schedule, it));
    net.set_parameters(theta);
  }
  finish(rep, problem, net, loss, orders, t0);
  return {std::move(rep), std::move(net)};
}

TrainResult train_inverse(const problems::Problem& problem, const InverseDataset& data,
                          const problems::OrderMap& initial_orders, const TrainConfig& config) {
  config.validate();
  const auto& spec = problem.spec();
  if (initial_orders.empty()) throw ConfigError("inverse mode needs at least one unknown order");
  std::vector<std::string> names;
  for (const auto& [name, value] : initial_orders) {
    if (!spec.trainable_orders.contains(name)) {
      throw ConfigError("order '" + name + "' is not trainable for case " + problems::to_string(spec.id));
    }
    names.push_back(name);
  }
  const auto t0 = Clock::now();
  const auto sizes = network_sizes(problem, config);
  nn::Network net = nn::init_network(sizes, config.seed);
  problems::OrderMap orders = problem.resolve_orders(initial_orders);
  const LossAssembler loss(problem, config.w_res, config.w_bc, &data, config.w_data);
  const auto schedule = config.schedule();

  TrainReport rep = start_report(problem, config, sizes);
  rep.w_data = config.w_data;

  const auto k = static_cast<Eigen::Index>(names.size());
  VectorXd theta = net.parameters();
  VectorXd omega(k);
  std::vector<double> lower(names.size());
  std::vector<double> upper(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    omega[static_cast<Eigen::Index>(i)] = orders.at(names[i]);
    const bool derivative = spec.order_roles.at(names[i]) == quad::OrderRole::Derivative;
    lower[i] = 1e-3;
    upper[i] = derivative ? 0.999 : 1e6;
  }
  auto adam = AdamState::zeros(theta.size(), config.adam_beta1, config.adam_beta2, config.adam_epsilon);
  auto adam_orders = AdamState::zeros(k, config.adam_beta1, config.adam_beta2, config.adam_epsilon);
  VectorXd order_grad(k);
  const double h = config.order_fd_step;

  const nn::LossEvaluator eval = [&](std::span<const nn::DerivBundle> b, std::span<nn::BundleAdjoint> adj) {
    const double phi = loss.evaluate(b, orders, adj).phi;
    // Orders enter only through the residual, so the sampled network fields are reused.
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto shifted = orders;
      shifted[names[i]] = orders.at(names[i]) + h;
      const double plus = loss.evaluate(b, shifted).phi;
      shifted[names[i]] = orders.at(names[i]) - h;
      const double minus = loss.evaluate(b, shifted).phi;
      order_grad[static_cast<Eigen::Index>(i)] = (plus - minus) / (2.0 * h);
    }
    return phi;
  };

  for (int it = 0; it < config.max_iters; ++it) {
    nn::GradientResult g;
    try {
      g = nn::param_gradient(net, loss.requests(), eval);
      if (!order_grad.allFinite()) throw NonFiniteError("order gradient has non-finite entries");
    } catch (const NonFiniteError& e) {
      rep.stop_reason = StopReason::Diverged;
      rep.message = e.what();
      break;
    }
    rep.loss_history.push_back(g.loss);
    if (plateau_reached(rep.loss_history, config.plateau_window, config.plateau_threshold)) {
      rep.stop_reason = StopReason::Plateau;
      break;
    }
    const double lr = learning_rate(schedule, it);
    adam_step(adam, theta, g.gradient, lr);
    net.set_parameters(theta);
    adam_step(adam_orders, omega, order_grad, lr);
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto& w = omega[static_cast<Eigen::Index>(i)];
      if (w < lower[i] || w > upper[i]) {
        w = std::clamp(w, lower[i], upper[i]);
        ++rep.clamp_events;
      }
      orders[names[i]] = w;
    }
  }
  std::map<std::string, double> recovered;
  for (const auto& n : names) recovered[n] = orders.at(n);
  rep.recovered_unknowns = recovered;
  finish(rep, problem, net, loss, orders, t0);
  return {std::move(rep), std::move(net)};
}

}  // namespace fides::train
