#pragma once

// Shared checks for the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "fides/neural/network.hpp"
#include "fides/problems/problem.hpp"
#include "fides/training/loss.hpp"
#include "fides/training/trainer.hpp"

namespace fides::testing {

struct SubstitutionNorms {
  double coarse = 0.0;  // max |R| with the exact solution on the default grid
  double fine = 0.0;    // same physical nodes on the grid with every count doubled
  bool converging() const { return (coarse <= 1e-12 && fine <= 1e-12) || coarse >= 3.0 * fine; }
};

inline SubstitutionNorms substitution_norms(problems::CaseId id, const problems::CaseOptions& base = {}) {
  using Eigen::Index;
  problems::CaseOptions fine_opts = base;
  fine_opts.refine = base.refine * 2;
  const auto coarse = problems::build_case(id, base);
  const auto fine = problems::build_case(id, fine_opts);
  const auto orders_c = coarse->resolve_orders({});
  const auto orders_f = fine->resolve_orders({});
  const Eigen::VectorXd rc = problems::residual_at(*coarse, problems::exact_evaluator(*coarse), {});
  const Eigen::VectorXd rf = problems::residual_at(*fine, problems::exact_evaluator(*fine), {});
  const auto nodes_c = coarse->residual_nodes(orders_c);
  const auto nodes_f = fine->residual_nodes(orders_f);
  const int outputs = coarse->spec().output_dims;
  const auto per_c = nodes_c.size() / static_cast<std::size_t>(outputs);
  const auto per_f = nodes_f.size() / static_cast<std::size_t>(outputs);

  std::map<std::pair<int, Index>, Index> fine_entry;
  for (std::size_t k = 0; k < nodes_f.size(); ++k) {
    fine_entry[{static_cast<int>(k / per_f), nodes_f[k]}] = static_cast<Index>(k);
  }
  SubstitutionNorms out;
  for (std::size_t k = 0; k < nodes_c.size(); ++k) {
    const int o = static_cast<int>(k / per_c);
    auto idx = coarse->spec().grid.unflatten(static_cast<std::size_t>(nodes_c[k]));
    for (auto& i : idx) i *= 2;
    const auto f = static_cast<Index>(fine->spec().grid.flat_index(idx));
    out.coarse = std::max(out.coarse, std::abs(rc[static_cast<Index>(k)]));
    out.fine = std::max(out.fine, std::abs(rf[fine_entry.at({o, f})]));
  }
  return out;
}

/// ||analytic - central FD|| / ||analytic|| for the full training loss at a fresh init.
inline double loss_gradient_error(const problems::Problem& problem, std::uint64_t seed, double h = 1e-6) {
  train::TrainConfig cfg;
  const auto sizes = train::network_sizes(problem, cfg);
  nn::Network net = nn::init_network(sizes, seed);
  const auto orders = problem.resolve_orders({});
  const train::LossAssembler loss(problem, 1.0, 1.0);
  const auto g = nn::param_gradient(net, loss.requests(), [&](std::span<const nn::DerivBundle> b,
                                                              std::span<nn::BundleAdjoint> adj) {
    return loss.evaluate(b, orders, adj).phi;
  });
  const Eigen::VectorXd theta = net.parameters();
  Eigen::VectorXd fd(theta.size());
  nn::Network probe = net;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd t = theta;
    t[i] = theta[i] + h;
    probe.set_parameters(t);
    const double plus = loss.evaluate(problems::network_evaluator(probe), orders).phi;
    t[i] = theta[i] - h;
    probe.set_parameters(t);
    const double minus = loss.evaluate(problems::network_evaluator(probe), orders).phi;
    fd[i] = (plus - minus) / (2 * h);
  }
  return (g.gradient - fd).norm() / g.gradient.norm();
}

}  // namespace fides::testing
