#include "fides/training/loss.hpp"

#include <cmath>
#include <random>

#include "fides/errors.hpp"

namespace fides::train {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

InverseDataset synthesize_dataset(const problems::Problem& problem, double noise_std, std::uint64_t noise_seed) {
  if (!problem.spec().has_exact) throw ConfigError("case has no exact solution to synthesize data from");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("noise_std must be finite and >= 0");
  InverseDataset d;
  d.coordinates = problem.collocation_points();
  d.observations = problem.exact(d.coordinates);
  d.noise_std = noise_std;
  d.noise_seed = noise_seed;
  if (noise_std > 0.0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> noise(0.0, noise_std);
    // Column-major walk: all points of output 0 first, then output 1, ...
    for (Index c = 0; c < d.observations.cols(); ++c) {
      for (Index r = 0; r < d.observations.rows(); ++r) d.observations(r, c) += noise(rng);
    }
  }
  return d;
}

LossAssembler::LossAssembler(const problems::Problem& problem, double w_res, double w_bc, const InverseDataset* data,
                             double w_data)
    : problem_(problem), w_res_(w_res), w_bc_(w_bc), w_data_(w_data), data_(data) {
  const auto& spec = problem.spec();
  if (spec.conditions.empty()) throw ConfigError("case declares no boundary or initial condition");
  requests_ = problem.residual_requests();
  n_residual_ = requests_.size();
  for (const auto& bc : spec.conditions) {
    if (bc.points.rows() == 0) throw ConfigError("condition '" + bc.name + "' has no points");
    if (bc.points.cols() != spec.input_dims || bc.targets.size() != bc.points.rows()) {
      throw ShapeError("condition '" + bc.name + "' points do not match the case dimensions");
    }
    requests_.push_back({bc.points, 0, {}});
  }
  if (data_) {
    if (data_->coordinates.cols() != spec.input_dims || data_->observations.rows() != data_->coordinates.rows() ||
        data_->observations.cols() != spec.output_dims) {
      throw ShapeError("inverse dataset does not match the case dimensions");
    }
    requests_.push_back({data_->coordinates, 0, {}});
  }
}

LossParts LossAssembler::evaluate(std::span<const nn::DerivBundle> bundles, const problems::OrderMap& orders,
                                  std::span<nn::BundleAdjoint> adjoints) const {
  if (bundles.size() != requests_.size()) throw ShapeError("bundle count does not match the loss requests");
  const bool grad = !adjoints.empty();
  const auto& spec = problem_.spec();
  LossParts parts;

  const auto residual_bundles = bundles.subspan(0, n_residual_);
  const VectorXd r = problem_.residual(residual_bundles, orders);
  parts.phi_res = r.squaredNorm() / static_cast<double>(r.size());
  if (grad) {
    const VectorXd rbar = (2.0 * w_res_ / static_cast<double>(r.size())) * r;
    problem_.residual_vjp(residual_bundles, orders, rbar, adjoints.subspan(0, n_residual_));
  }

  for (std::size_t c = 0; c < spec.conditions.size(); ++c) {
    const auto& bc = spec.conditions[c];
    const std::size_t k = n_residual_ + c;
    const VectorXd diff = bundles[k].value.col(bc.output) - bc.targets;
    const double m = static_cast<double>(diff.size());
    parts.phi_bc += diff.squaredNorm() / m;
    if (grad) adjoints[k].value.col(bc.output) += (2.0 * w_bc_ / m) * diff;
  }

  if (data_) {
    const std::size_t k = requests_.size() - 1;
    const MatrixXd diff = bundles[k].value - data_->observations;
    const double m = static_cast<double>(diff.size());
    parts.phi_data = diff.squaredNorm() / m;
    if (grad) adjoints[k].value += (2.0 * w_data_ / m) * diff;
  }

  parts.phi = w_res_ * parts.phi_res + w_bc_ * parts.phi_bc + (data_ ? w_data_ * parts.phi_data : 0.0);
  return parts;
}

std::vector<nn::DerivBundle> LossAssembler::sample(const problems::FieldEvaluator& field) const {
  std::vector<nn::DerivBundle> b;
  b.reserve(requests_.size());
  for (const auto& r : requests_) b.push_back(field(r));
  return b;
}

LossParts LossAssembler::evaluate(const problems::FieldEvaluator& field, const problems::OrderMap& orders) const {
  const auto b = sample(field);
  return evaluate(b, orders);
}

double residual_loss(const problems::Problem& problem, const problems::FieldEvaluator& field,
                     const problems::OrderMap& orders) {
  const VectorXd r = problems::residual_at(problem, field, orders);
  return r.squaredNorm() / static_cast<double>(r.size());
}

double residual_loss(const problems::Problem& problem, const nn::Network& net, const problems::OrderMap& orders) {
  return residual_loss(problem, problems::network_evaluator(net), orders);
}

double boundary_loss(const problems::Problem& problem, const problems::FieldEvaluator& field) {
  const auto& spec = problem.spec();
  if (spec.conditions.empty()) throw ConfigError("case declares no boundary or initial condition");
  double total = 0.0;
  for (const auto& bc : spec.conditions) {
    if (bc.points.rows() == 0) throw ConfigError("condition '" + bc.name + "' has no points");
    const auto b = field({bc.points, 0, {}});
    total += (b.value.col(bc.output) - bc.targets).squaredNorm() / static_cast<double>(bc.points.rows());
  }
  return total;
}

double boundary_loss(const problems::Problem& problem, const nn::Network& net) {
  return boundary_loss(problem, problems::network_evaluator(net));
}

}  // namespace fides::train
