#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fides/fracquad/grid.hpp"
#include "fides/fracquad/weights.hpp"
#include "fides/neural/network.hpp"

namespace fides::problems {

enum class CaseId { C1, C2, C3, C4, C5, C6, C7, S1, S2, S3 };

std::string to_string(CaseId id);
/// Accepts "C1".."C7", "S1".."S3" (case-insensitive). Throws ConfigError otherwise.
CaseId parse_case_id(std::string_view text);
std::vector<CaseId> all_cases();

/// Operator orders by name ("alpha" for integrals, "beta" for derivatives).
using OrderMap = std::map<std::string, double>;
double require_order(const OrderMap& orders, const std::string& name);

enum class IntegralKind { Fredholm, Volterra };

struct IntegralTerm {
  std::string order_name;
  IntegralKind kind = IntegralKind::Volterra;
  std::vector<int> axes;       // integrated input axes, outermost last
  double lower = 0.0;          // Fredholm bounds (first axis; product cases use the same bounds per axis)
  double upper = 0.0;
  std::string kernel;          // human-readable, for the catalog
  std::string integrand;
};

struct DerivativeTerm {
  std::string order_name;
  int axis = 0;
  bool fractional = false;     // true: RL derivative via negative-order quadrature
};

struct BoundaryCondition {
  std::string name;
  Eigen::MatrixXd points;      // count x input_dims
  int output = 0;
  Eigen::VectorXd targets;
};

struct ProblemSpec {
  CaseId id = CaseId::C1;
  std::string title;
  std::string equation_tag;
  int input_dims = 1;
  int output_dims = 1;
  quad::ProductGrid grid{{quad::AxisGrid(0.0, 1.0, 2)}};
  std::vector<IntegralTerm> integral_terms;
  std::vector<DerivativeTerm> derivative_terms;
  std::vector<BoundaryCondition> conditions;
  OrderMap orders;                               // defaults
  std::map<std::string, quad::OrderRole> order_roles;
  std::set<std::string> trainable_orders;        // orders inverse mode may recover
  /// Known source terms f(x) per output, as they appear on the right-hand side.
  std::function<double(std::span<const double> x, int output)> forcing;
  bool has_exact = false;
  std::vector<int> hidden_layers{16, 16, 16};
  int default_iters = 30000;
};

/// A registered equation: residual over the collocation nodes plus its adjoint.
///
/// residual_requests()[0] is always the collocation grid in flat order; further
/// requests are auxiliary quadrature grids for Fredholm terms whose bounds differ
/// from the domain. Residual entries are stacked per output and skip nodes where
/// a fractional derivative is undefined (the first node along its axis).
class Problem {
 public:
  explicit Problem(ProblemSpec spec);
  virtual ~Problem() = default;

  const ProblemSpec& spec() const { return spec_; }
  Eigen::MatrixXd collocation_points() const { return spec_.grid.points(); }

  virtual std::vector<nn::SampleRequest> residual_requests() const = 0;
  virtual Eigen::VectorXd residual(std::span<const nn::DerivBundle> fields, const OrderMap& orders) const = 0;
  /// Adds (dR/dfields)^T rbar into the adjoints (one per request).
  virtual void residual_vjp(std::span<const nn::DerivBundle> fields, const OrderMap& orders,
                            const Eigen::VectorXd& rbar, std::span<nn::BundleAdjoint> adjoints) const = 0;

  /// Collocation node (flat index) behind each residual entry, outputs stacked in order.
  virtual std::vector<Eigen::Index> residual_nodes(const OrderMap& orders) const = 0;

  /// Exact solution (batch x outputs); throws ConfigError when the case has none.
  Eigen::MatrixXd exact(const Eigen::MatrixXd& points) const;
  /// Exact values and the analytic input derivatives a request asks for.
  nn::DerivBundle exact_bundle(const nn::SampleRequest& request) const;

  /// Orders with defaults filled in from ProblemSpec and validated against their roles.
  OrderMap resolve_orders(const OrderMap& overrides) const;

 protected:
  using ExactValue = std::function<double(std::span<const double> x, int output)>;
  /// (x, output, axis, derivative order 1 or 2)
  using ExactDeriv = std::function<double(std::span<const double> x, int output, int axis, int order)>;

  ExactValue exact_value_;
  ExactDeriv exact_deriv_;
  ProblemSpec spec_;
};

using FieldEvaluator = std::function<nn::DerivBundle(const nn::SampleRequest&)>;
FieldEvaluator network_evaluator(const nn::Network& net);
FieldEvaluator exact_evaluator(const Problem& problem);

/// Residual with an arbitrary field (network or exact solution) substituted.
Eigen::VectorXd residual_at(const Problem& problem, const FieldEvaluator& field, const OrderMap& orders);

/// Exact values at arbitrary points; never used for training.
Eigen::MatrixXd exact_eval(const Problem& problem, const Eigen::MatrixXd& points);

struct CaseOptions {
  std::optional<int> n;             // intervals per axis (all axes)
  int refine = 1;                   // multiplies every grid count
  std::optional<double> beta;       // C6 / C7 derivative order
};

std::unique_ptr<Problem> build_case(CaseId id, const CaseOptions& options = {});

/// Tab-separated catalog: id, dims, outputs, orders, N, has_exact, equation, title.
std::string case_catalog();

}  // namespace fides::problems
