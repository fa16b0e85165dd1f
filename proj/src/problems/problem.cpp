#include "fides/problems/problem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "fides/errors.hpp"

namespace fides::problems {

std::string to_string(CaseId id) {
  switch (id) {
    case CaseId::C1: return "C1";
    case CaseId::C2: return "C2";
    case CaseId::C3: return "C3";
    case CaseId::C4: return "C4";
    case CaseId::C5: return "C5";
    case CaseId::C6: return "C6";
    case CaseId::C7: return "C7";
    case CaseId::S1: return "S1";
    case CaseId::S2: return "S2";
    case CaseId::S3: return "S3";
  }
  return "?";
}

CaseId parse_case_id(std::string_view text) {
  std::string up(text);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (CaseId id : all_cases()) {
    if (to_string(id) == up) return id;
  }
  throw ConfigError("unknown case id '" + std::string(text) + "'");
}

std::vector<CaseId> all_cases() {
  return {CaseId::C1, CaseId::C2, CaseId::C3, CaseId::C4, CaseId::C5,
          CaseId::C6, CaseId::C7, CaseId::S1, CaseId::S2, CaseId::S3};
}

double require_order(const OrderMap& orders, const std::string& name) {
  auto it = orders.find(name);
  if (it == orders.end()) throw ConfigError("operator order '" + name + "' is not resolved");
  return it->second;
}

Problem::Problem(ProblemSpec spec) : spec_(std::move(spec)) {}

Eigen::MatrixXd Problem::exact(const Eigen::MatrixXd& points) const {
  if (!spec_.has_exact || !exact_value_) {
    throw ConfigError("case " + to_string(spec_.id) + " has no exact solution");
  }
  if (points.cols() != spec_.input_dims) throw ShapeError("exact: point dimension mismatch");
  Eigen::MatrixXd out(points.rows(), spec_.output_dims);
  std::vector<double> x(static_cast<std::size_t>(spec_.input_dims));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (int d = 0; d < spec_.input_dims; ++d) x[static_cast<std::size_t>(d)] = points(i, d);
    for (int o = 0; o < spec_.output_dims; ++o) out(i, o) = exact_value_(x, o);
  }
  return out;
}

nn::DerivBundle Problem::exact_bundle(const nn::SampleRequest& request) const {
  nn::DerivBundle b;
  b.value = exact(request.points);
  b.max_order = request.max_order;
  if (request.max_order == 0) return b;
  if (!exact_deriv_) throw ConfigError("case " + to_string(spec_.id) + " provides no exact derivatives");
  b.axes = request.axes;
  const Eigen::Index rows = request.points.rows();
  std::vector<double> x(static_cast<std::size_t>(spec_.input_dims));
  for (int order = 1; order <= request.max_order; ++order) {
    auto& slots = order == 1 ? b.d1 : b.d2;
    for (int axis : request.axes) {
      Eigen::MatrixXd m(rows, spec_.output_dims);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (int d = 0; d < spec_.input_dims; ++d) x[static_cast<std::size_t>(d)] = request.points(i, d);
        for (int o = 0; o < spec_.output_dims; ++o) m(i, o) = exact_deriv_(x, o, axis, order);
      }
      slots.push_back(std::move(m));
    }
  }
  return b;
}

OrderMap Problem::resolve_orders(const OrderMap& overrides) const {
  OrderMap out = spec_.orders;
  for (const auto& [name, value] : overrides) {
    auto it = out.find(name);
    if (it == out.end()) {
      throw ConfigError("case " + to_string(spec_.id) + " has no operator order named '" + name + "'");
    }
    it->second = value;
  }
  for (const auto& [name, value] : out) {
    const auto role = spec_.order_roles.at(name);
    if (!std::isfinite(value)) throw ConfigError("order '" + name + "' is not finite");
    if (role == quad::OrderRole::Integral && !(value > 0.0)) {
      throw ConfigError("integral order '" + name + "' must be > 0");
    }
    if (role == quad::OrderRole::Derivative && !(value >= 0.0)) {
      throw ConfigError("derivative order '" + name + "' must be >= 0");
    }
  }
  return out;
}

FieldEvaluator network_evaluator(const nn::Network& net) {
  return [&net](const nn::SampleRequest& req) {
    return net.forward_with_input_derivs(req.points, req.max_order, req.axes);
  };
}

FieldEvaluator exact_evaluator(const Problem& problem) {
  return [&problem](const nn::SampleRequest& req) { return problem.exact_bundle(req); };
}

Eigen::VectorXd residual_at(const Problem& problem, const FieldEvaluator& field, const OrderMap& orders) {
  const auto requests = problem.residual_requests();
  std::vector<nn::DerivBundle> bundles;
  bundles.reserve(requests.size());
  for (const auto& r : requests) bundles.push_back(field(r));
  return problem.residual(bundles, problem.resolve_orders(orders));
}

Eigen::MatrixXd exact_eval(const Problem& problem, const Eigen::MatrixXd& points) {
  return problem.exact(points);
}

}  // namespace fides::problems
