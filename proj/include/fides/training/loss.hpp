#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fides/neural/network.hpp"
#include "fides/problems/problem.hpp"

namespace fides::train {

/// Observations on a set of points, one column per network output.
struct InverseDataset {
  Eigen::MatrixXd coordinates;   // points x input_dims
  Eigen::MatrixXd observations;  // points x outputs
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;
};

/// Exact solution on the collocation grid plus seeded N(0, noise_std^2) noise.
InverseDataset synthesize_dataset(const problems::Problem& problem, double noise_std, std::uint64_t noise_seed);

struct LossParts {
  double phi = 0.0;
  double phi_res = 0.0;
  double phi_bc = 0.0;
  double phi_data = 0.0;
};

/// Residual, boundary and (optionally) data terms over a fixed set of sample requests.
/// Request layout: the problem's residual requests, then one per condition, then the data points.
class LossAssembler {
 public:
  LossAssembler(const problems::Problem& problem, double w_res, double w_bc, const InverseDataset* data = nullptr,
                double w_data = 1.0);

  const std::vector<nn::SampleRequest>& requests() const { return requests_; }

  /// Loss from precomputed bundles; fills `adjoints` with d(phi)/d(bundle) when non-empty.
  LossParts evaluate(std::span<const nn::DerivBundle> bundles, const problems::OrderMap& orders,
                     std::span<nn::BundleAdjoint> adjoints = {}) const;

  LossParts evaluate(const problems::FieldEvaluator& field, const problems::OrderMap& orders) const;

  std::vector<nn::DerivBundle> sample(const problems::FieldEvaluator& field) const;

 private:
  const problems::Problem& problem_;
  double w_res_;
  double w_bc_;
  double w_data_;
  const InverseDataset* data_;
  std::size_t n_residual_ = 0;
  std::vector<nn::SampleRequest> requests_;
};

/// Mean squared residual over the active collocation nodes.
double residual_loss(const problems::Problem& problem, const problems::FieldEvaluator& field,
                     const problems::OrderMap& orders = {});
double residual_loss(const problems::Problem& problem, const nn::Network& net, const problems::OrderMap& orders = {});

/// Sum over conditions of the mean squared mismatch at the condition points.
double boundary_loss(const problems::Problem& problem, const problems::FieldEvaluator& field);
double boundary_loss(const problems::Problem& problem, const nn::Network& net);

}  // namespace fides::train
