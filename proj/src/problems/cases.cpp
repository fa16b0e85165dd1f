// Registry of benchmark equations. Each case composes its residual from the
// quadrature primitives and network bundles, and hand-writes the matching
// vector-Jacobian product so training gets exact parameter gradients.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fides/errors.hpp"
#include "fides/fracquad/gamma.hpp"
#include "fides/fracquad/rl.hpp"
#include "fides/problems/problem.hpp"

namespace fides::problems {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using quad::AxisGrid;
using quad::ProductGrid;
using quad::VolterraOperator;

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const VolterraOperator> axis_operator(double order, const AxisGrid& g) {
  return quad::WeightCache::global().get(order, g.count(), g.step());
}

/// Face or point condition sampled with `count` evenly spaced points along `free_axis`.
BoundaryCondition face_condition(std::string name, int dims, int free_axis, const AxisGrid& along,
                                 std::vector<double> fixed, int count, int output,
                                 const std::function<double(std::span<const double>)>& target) {
  BoundaryCondition bc;
  bc.name = std::move(name);
  bc.output = output;
  bc.points.resize(count, dims);
  bc.targets.resize(count);
  std::vector<double> x(static_cast<std::size_t>(dims));
  for (int m = 0; m < count; ++m) {
    const double s = along.start() + (along.stop() - along.start()) * m / (count - 1);
    for (int d = 0; d < dims; ++d) {
      x[static_cast<std::size_t>(d)] = d == free_axis ? s : fixed[static_cast<std::size_t>(d)];
      bc.points(m, d) = x[static_cast<std::size_t>(d)];
    }
    bc.targets[m] = target(x);
  }
  return bc;
}

BoundaryCondition point_condition(std::string name, std::vector<double> at, int output, double target) {
  BoundaryCondition bc;
  bc.name = std::move(name);
  bc.output = output;
  bc.points.resize(1, static_cast<Index>(at.size()));
  for (std::size_t d = 0; d < at.size(); ++d) bc.points(0, static_cast<Index>(d)) = at[d];
  bc.targets = VectorXd::Constant(1, target);
  return bc;
}

int boundary_count(const AxisGrid& g) { return std::max(16, g.size()); }

// Shared machinery for cases whose residual lives on a product collocation grid.
class GridCase : public Problem {
 public:
  explicit GridCase(ProblemSpec spec) : Problem(std::move(spec)) {
    shape_ = spec_.grid.shape();
    points_ = spec_.grid.points();
    nodes_ = points_.rows();
    forcing_.resize(nodes_, spec_.output_dims);
    std::vector<double> x(static_cast<std::size_t>(spec_.input_dims));
    for (Index i = 0; i < nodes_; ++i) {
      for (int d = 0; d < spec_.input_dims; ++d) x[static_cast<std::size_t>(d)] = points_(i, d);
      for (int o = 0; o < spec_.output_dims; ++o) forcing_(i, o) = spec_.forcing(x, o);
    }
  }

 protected:
  nn::SampleRequest collocation_request(int max_order, std::vector<int> axes) const {
    return {points_, max_order, max_order > 0 ? std::move(axes) : std::vector<int>{}};
  }

  VectorXd coord(int axis) const { return points_.col(axis); }

  std::shared_ptr<const VolterraOperator> op(double order, int axis) const {
    return axis_operator(order, spec_.grid.axis(axis));
  }

  VectorXd along(const VolterraOperator& l, const VectorXd& v, int axis, bool transpose = false) const {
    return quad::apply_along_axis(l.matrix(), v, shape_, axis, transpose);
  }

  /// Flat node indices kept in the residual; nodes at index 0 along skip are dropped.
  std::vector<Index> active_nodes(int skip) const {
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(nodes_));
    for (Index i = 0; i < nodes_; ++i) {
      if (skip >= 0 && spec_.grid.unflatten(static_cast<std::size_t>(i))[static_cast<std::size_t>(skip)] == 0) {
        continue;
      }
      keep.push_back(i);
    }
    return keep;
  }

  VectorXd compress(const std::vector<VectorXd>& per_output, int skip) const {
    const auto keep = active_nodes(skip);
    VectorXd r(static_cast<Index>(keep.size() * per_output.size()));
    Index k = 0;
    for (const auto& v : per_output) {
      for (Index i : keep) r[k++] = v[i];
    }
    return r;
  }

  std::vector<VectorXd> expand(const VectorXd& rbar, int skip) const {
    const auto keep = active_nodes(skip);
    if (rbar.size() != static_cast<Index>(keep.size()) * spec_.output_dims) {
      throw ShapeError("residual adjoint length does not match the active residual entries");
    }
    std::vector<VectorXd> out(static_cast<std::size_t>(spec_.output_dims), VectorXd::Zero(nodes_));
    Index k = 0;
    for (auto& v : out) {
      for (Index i : keep) v[i] = rbar[k++];
    }
    return out;
  }

  std::vector<Index> residual_nodes(const OrderMap& orders) const override {
    const auto keep = active_nodes(skip_axis(orders));
    std::vector<Index> out;
    for (int o = 0; o < spec_.output_dims; ++o) out.insert(out.end(), keep.begin(), keep.end());
    return out;
  }

  /// Axis whose first node is left out of the residual, or -1.
  virtual int skip_axis(const OrderMap&) const { return -1; }

  static int fractional_skip(double beta, int axis) {
    if (beta < 1.0) return beta > 0.0 ? axis : -1;
    return quad::split_order(beta).fractional > 0.0 ? axis : -1;
  }

  /// D^beta u along `axis`: network derivatives for the integer part, quadrature for the rest.
  VectorXd derivative_term(const nn::DerivBundle& b, int output, int axis, double beta) const {
    int m = 0;
    double frac = beta;
    if (beta >= 1.0) {
      const auto s = quad::split_order(beta);
      m = s.integer_part;
      frac = s.fractional;
    }
    VectorXd base;
    switch (m) {
      case 0: base = b.value.col(output); break;
      case 1: base = b.first(axis).col(output); break;
      case 2: base = b.second(axis).col(output); break;
      default: throw ConfigError("derivative orders >= 3 are not supported");
    }
    if (frac == 0.0) return base;
    return along(*op(-frac, axis), base, axis);
  }

  void derivative_term_vjp(const nn::DerivBundle& b, nn::BundleAdjoint& adj, int output, int axis, double beta,
                           const VectorXd& bar) const {
    int m = 0;
    double frac = beta;
    if (beta >= 1.0) {
      const auto s = quad::split_order(beta);
      m = s.integer_part;
      frac = s.fractional;
    }
    const VectorXd base_bar = frac == 0.0 ? bar : along(*op(-frac, axis), bar, axis, true);
    switch (m) {
      case 0: adj.value.col(output) += base_bar; break;
      case 1: adj.d1[b.slot(axis)].col(output) += base_bar; break;
      case 2: adj.d2[b.slot(axis)].col(output) += base_bar; break;
      default: throw ConfigError("derivative orders >= 3 are not supported");
    }
  }

  std::vector<int> shape_;
  MatrixXd points_;
  Index nodes_ = 0;
  MatrixXd forcing_;  // nodes x outputs
};

ProblemSpec base_spec(CaseId id, std::string title, std::string tag, std::vector<AxisGrid> axes, int outputs) {
  ProblemSpec s;
  s.id = id;
  s.title = std::move(title);
  s.equation_tag = std::move(tag);
  s.input_dims = static_cast<int>(axes.size());
  s.output_dims = outputs;
  s.grid = ProductGrid(std::move(axes));
  s.has_exact = true;
  return s;
}

int count_for(const CaseOptions& o, int default_count) {
  const int n = o.n.value_or(default_count);
  if (n < 2) throw ConfigError("grid count must be >= 2");
  if (o.refine < 1) throw ConfigError("refine factor must be >= 1");
  return n * o.refine;
}

// ---------------------------------------------------------------------------
// C1: u'(x) = cos x - x + 1/4 * int_{-pi/2}^{pi/2} x t u(t)^2 dt,  u(-pi/2) = 0.
class FredholmIde1D final : public GridCase {
 public:
  explicit FredholmIde1D(ProblemSpec s) : GridCase(std::move(s)) {
    exact_value_ = [](std::span<const double> x, int) { return 1.0 + std::sin(x[0]); };
    exact_deriv_ = [](std::span<const double> x, int, int, int order) {
      return order == 1 ? std::cos(x[0]) : -std::sin(x[0]);
    };
  }

  int skip_axis(const OrderMap& orders) const override {
    return fractional_skip(require_order(orders, "beta"), 0);
  }

  std::vector<nn::SampleRequest> residual_requests() const override { return {collocation_request(1, {0})}; }

  VectorXd residual(std::span<const nn::DerivBundle> f, const OrderMap& orders) const override {
    const double beta = require_order(orders, "beta");
    const VectorXd x = coord(0);
    const VectorXd u = f[0].value.col(0);
    const double integral = integral_value(u, x, require_order(orders, "alpha"));
    VectorXd r = derivative_term(f[0], 0, 0, beta) - forcing_.col(0) - 0.25 * integral * x;
    return compress({r}, fractional_skip(beta, 0));
  }

  void residual_vjp(std::span<const nn::DerivBundle> f, const OrderMap& orders, const VectorXd& rbar,
                    std::span<nn::BundleAdjoint> adj) const override {
    const double beta = require_order(orders, "beta");
    const VectorXd rb = expand(rbar, fractional_skip(beta, 0))[0];
    const VectorXd x = coord(0);
    const VectorXd u = f[0].value.col(0);
    derivative_term_vjp(f[0], adj[0], 0, 0, beta, rb);
    const double integral_bar = -0.25 * x.dot(rb);
    const auto w = weights(require_order(orders, "alpha"));
    adj[0].value.col(0).array() += integral_bar * w.transpose().array() * x.array() * 2.0 * u.array();
  }

 private:
  Eigen::RowVectorXd weights(double alpha) const { return op(alpha, 0)->endpoint_row(); }
  double integral_value(const VectorXd& u, const VectorXd& t, double alpha) const {
    return weights(alpha).dot((t.array() * u.array().square()).matrix());
  }
};

std::unique_ptr<Problem> make_c1(const CaseOptions& o) {
  const int n = count_for(o, 50);
  auto s = base_spec(CaseId::C1, "1D Fredholm integro-differential equation", "fredholm-ide-1d",
                     {AxisGrid(-kPi / 2, kPi / 2, n)}, 1);
  s.integral_terms = {{"alpha", IntegralKind::Fredholm, {0}, -kPi / 2, kPi / 2, "x*t", "u(t)^2"}};
  s.derivative_terms = {{"beta", 0, false}};
  s.conditions = {point_condition("u(-pi/2)=0", {-kPi / 2}, 0, 0.0)};
  s.orders = {{"alpha", 1.0}, {"beta", 1.0}};
  s.order_roles = {{"alpha", quad::OrderRole::Integral}, {"beta", quad::OrderRole::Derivative}};
  s.trainable_orders = {"alpha"};
  s.forcing = [](std::span<const double> x, int) { return std::cos(x[0]) - x[0]; };
  s.hidden_layers = {20, 20};
  return std::make_unique<FredholmIde1D>(std::move(s));
}

// ---------------------------------------------------------------------------
// C2 / S3: u = x^2 y^2 z^2 - e^{-xyz}/29400
//              + 0.01 int_0^1 int_0^1 int_0^1 e^{-xyz} t^2 s r^2 u(t,s,r)^2,  u(0,0,0) = 0.
// The triple integral always runs over the unit cube; S3 widens only the domain.
class FredholmIe3D final : public GridCase {
 public:
  FredholmIe3D(ProblemSpec s, std::optional<ProductGrid> quad_grid) : GridCase(std::move(s)) {
    if (quad_grid) {
      quad_grid_ = std::move(quad_grid);
      quad_points_ = quad_grid_->points();
    }
    exact_value_ = [](std::span<const double> x, int) { return x[0] * x[0] * x[1] * x[1] * x[2] * x[2]; };
    exact_deriv_ = [](std::span<const double> x, int, int axis, int order) {
      double prod = 1.0;
      for (int d = 0; d < 3; ++d) {
        if (d != axis) prod *= x[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
      }
      return order == 1 ? 2.0 * x[static_cast<std::size_t>(axis)] * prod : 2.0 * prod;
    };
    const VectorXd xyz = (points_.col(0).array() * points_.col(1).array() * points_.col(2).array()).matrix();
    outer_ = (-0.01 * (-xyz.array()).exp()).matrix();
  }

  std::vector<nn::SampleRequest> residual_requests() const override {
    std::vector<nn::SampleRequest> r{collocation_request(0, {})};
    if (quad_grid_) r.push_back({quad_points_, 0, {}});
    return r;
  }

  VectorXd residual(std::span<const nn::DerivBundle> f, const OrderMap& orders) const override {
    const double alpha = require_order(orders, "alpha");
    const VectorXd uq = integrand_field(f).value.col(0);
    const VectorXd g = (kernel_.array() * uq.array().square()).matrix();
    const double integral = triple_integral(g, alpha);
    return f[0].value.col(0) - forcing_.col(0) + outer_ * integral;
  }

  void residual_vjp(std::span<const nn::DerivBundle> f, const OrderMap& orders, const VectorXd& rbar,
                    std::span<nn::BundleAdjoint> adj) const override {
    const double alpha = require_order(orders, "alpha");
    adj[0].value.col(0) += rbar;
    const double integral_bar = outer_.dot(rbar);
    const VectorXd uq = integrand_field(f).value.col(0);
    const VectorXd w = tensor_weights(alpha);
    auto& target = quad_grid_ ? adj[1] : adj[0];
    target.value.col(0).array() += integral_bar * w.array() * kernel_.array() * 2.0 * uq.array();
  }

  void finish_setup() {
    const Eigen::MatrixXd& q = quad_grid_ ? quad_points_ : points_;
    kernel_ = (q.col(0).array().square() * q.col(1).array() * q.col(2).array().square()).matrix();
  }

 private:
  const nn::DerivBundle& integrand_field(std::span<const nn::DerivBundle> f) const { return quad_grid_ ? f[1] : f[0]; }
  const ProductGrid& integration_grid() const { return quad_grid_ ? *quad_grid_ : spec_.grid; }

  // Nested single-axis definite integrals, innermost axis first.
  double triple_integral(const VectorXd& g, double alpha) const {
    const auto& grid = integration_grid();
    std::vector<int> shape = grid.shape();
    VectorXd v = g;
    for (int axis = 2; axis >= 0; --axis) {
      const auto w = axis_operator(alpha, grid.axis(axis))->endpoint_row();
      v = quad::reduce_along_axis(w, v, shape, axis);
      shape.erase(shape.begin() + axis);
      if (shape.empty()) shape.push_back(1);
    }
    return v[0];
  }

  VectorXd tensor_weights(double alpha) const {
    const auto& grid = integration_grid();
    std::vector<Eigen::RowVectorXd> w;
    for (int a = 0; a < 3; ++a) w.push_back(axis_operator(alpha, grid.axis(a))->endpoint_row());
    VectorXd out(static_cast<Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto idx = grid.unflatten(i);
      out[static_cast<Index>(i)] = w[0][idx[0]] * w[1][idx[1]] * w[2][idx[2]];
    }
    return out;
  }

  std::optional<ProductGrid> quad_grid_;
  MatrixXd quad_points_;
  VectorXd kernel_;  // t^2 s r^2 on the integration grid
  VectorXd outer_;   // -0.01 e^{-xyz} on the collocation grid
};

std::unique_ptr<Problem> make_c2_like(CaseId id, double upper, const CaseOptions& o) {
  const int n = count_for(o, 10);
  const bool wide = upper != 1.0;
  auto s = base_spec(id, wide ? "3D Fredholm integral equation on [0,2]^3" : "3D Fredholm integral equation",
                     wide ? "fredholm-ie-3d-wide" : "fredholm-ie-3d",
                     {AxisGrid(0, upper, n), AxisGrid(0, upper, n), AxisGrid(0, upper, n)}, 1);
  s.integral_terms = {{"alpha", IntegralKind::Fredholm, {0, 1, 2}, 0.0, 1.0, "e^{-xyz} t^2 s r^2", "u(t,s,r)^2"}};
  s.conditions = {point_condition("u(0,0,0)=0", {0, 0, 0}, 0, 0.0)};
  s.orders = {{"alpha", 1.0}};
  s.order_roles = {{"alpha", quad::OrderRole::Integral}};
  s.trainable_orders = {"alpha"};
  s.forcing = [](std::span<const double> x, int) {
    const double p = x[0] * x[1] * x[2];
    return p * p - std::exp(-p) / 29400.0;
  };
  std::optional<ProductGrid> quad_grid;
  if (wide) quad_grid = ProductGrid({AxisGrid(0, 1, n), AxisGrid(0, 1, n), AxisGrid(0, 1, n)});
  auto p = std::make_unique<FredholmIe3D>(std::move(s), std::move(quad_grid));
  p->finish_setup();
  return p;
}

// ---------------------------------------------------------------------------
// C3: u'(x) = 5/2 x - 1/2 x e^{x^2} + int_0^x x t e^{u(t)} dt,  u(0) = 0.
class VolterraIde1D final : public GridCase {
 public:
  explicit VolterraIde1D(ProblemSpec s) : GridCase(std::move(s)) {
    exact_value_ = [](std::span<const double> x, int) { return x[0] * x[0]; };
    exact_deriv_ = [](std::span<const double> x, int, int, int order) { return order == 1 ? 2.0 * x[0] : 2.0; };
  }

  int skip_axis(const OrderMap& orders) const override {
    return fractional_skip(require_order(orders, "beta"), 0);
  }

  std::vector<nn::SampleRequest> residual_requests() const override { return {collocation_request(1, {0})}; }

  VectorXd residual(std::span<const nn::DerivBundle> f, const OrderMap& orders) const override {
    const double beta = require_order(orders, "beta");
    const VectorXd x = coord(0);
    const VectorXd u = f[0].value.col(0);
    const VectorXd g = (x.array() * u.array().exp()).matrix();
    const VectorXd v = op(require_order(orders, "alpha"), 0)->matrix() * g;
    VectorXd r = derivative_term(f[0], 0, 0, beta) - forcing_.col(0) - (x.array() * v.array()).matrix();
    return compress({r}, fractional_skip(beta, 0));
  }

  void residual_vjp(std::span<const nn::DerivBundle> f, const OrderMap& orders, const VectorXd& rbar,
                    std::span<nn::BundleAdjoint> adj) const override {
    const double beta = require_order(orders, "beta");
    const VectorXd rb = expand(rbar, fractional_skip(beta, 0))[0];
    const VectorXd x = coord(0);
    const VectorXd u = f[0].value.col(0);
    derivative_term_vjp(f[0], adj[0], 0, 0, beta, rb);
    const VectorXd vbar = -(x.array() * rb.array()).matrix();
    const VectorXd gbar = op(require_order(orders, "alpha"), 0)->matrix().transpose() * vbar;
    adj[0].value.col(0).array() += gbar.array() * x.array() * u.array().exp();
  }
};

std::unique_ptr<Problem> make_c3(const CaseOptions& o) {
  const int n = count_for(o, 64);
  auto s = base_spec(CaseId::C3, "1D Volterra integro-differential equation", "volterra-ide-1d",
                     {AxisGrid(0, 1, n)}, 1);
  s.integral_terms = {{"alpha", IntegralKind::Volterra, {0}, 0.0, 0.0, "x*t", "e^{u(t)}"}};
  s.derivative_terms = {{"beta", 0, false}};
  s.conditions = {point_condition("u(0)=0", {0.0}, 0, 0.0)};
  s.orders = {{"alpha", 1.0}, {"beta", 1.0}};
  s.order_roles = {{"alpha", quad::OrderRole::Integral}, {"beta", quad::OrderRole::Derivative}};
  s.trainable_orders = {"alpha"};
  s.forcing = [](std::span<const double> x, int) { return 2.5 * x[0] - 0.5 * x[0] * std::exp(x[0] * x[0]); };
  return std::make_unique<VolterraIde1D>(std::move(s));
}

// ---------------------------------------------------------------------------
// C4: u(x,y) = f(x,y) + int_0^y int_0^x (x t^2 + cos s) u(t,s)^2 dt ds,  u(0,0) = 0.
class VolterraIe2D final : public GridCase {
 public:
  explicit VolterraIe2D(ProblemSpec s) : GridCase(std::move(s)) {
    exact_value_ = [](std::span<const double> x, int) { return x[0] * std::sin(x[1]); };
    exact_deriv_ = [](std::span<const double> x, int, int axis, int order) {
      if (axis == 0) return order == 1 ? std::sin(x[1]) : 0.0;
      return order == 1 ? x[0] * std::cos(x[1]) : -x[0] * std::sin(x[1]);
    };
    t2_ = coord(0).array().square().matrix();
    cos_s_ = coord(1).array().cos().matrix();
  }

  std::vector<nn::SampleRequest> residual_requests() const override { return {collocation_request(0, {})}; }

  VectorXd residual(std::span<const nn::DerivBundle> f, const OrderMap& orders) const override {
    const double alpha = require_order(orders, "alpha");
    const VectorXd u = f[0].value.col(0);
    const VectorXd u2 = u.array().square().matrix();
    const VectorXd a = double_integral((t2_.array() * u2.array()).matrix(), alpha);
    const VectorXd b = double_integral((cos_s_.array() * u2.array()).matrix(), alpha);
    return u - forcing_.col(0) - (coord(0).array() * a.array()).matrix() - b;
  }

  void residual_vjp(std::span<const nn::DerivBundle> f, const OrderMap& orders, const VectorXd& rbar,
                    std::span<nn::BundleAdjoint> adj) const override {
    const double alpha = require_order(orders, "alpha");
    const VectorXd u = f[0].value.col(0);
    adj[0].value.col(0) += rbar;
    const VectorXd abar = double_integral_t(-(coord(0).array() * rbar.array()).matrix(), alpha);
    const VectorXd bbar = double_integral_t(-rbar, alpha);
    adj[0].value.col(0).array() += 2.0 * u.array() * (t2_.array() * abar.array() + cos_s_.array() * bbar.array());
  }

 private:
  VectorXd double_integral(const VectorXd& g, double alpha) const {
    return along(*op(alpha, 1), along(*op(alpha, 0), g, 0), 1);
  }
  VectorXd double_integral_t(const VectorXd& g, double alpha) const {
    return along(*op(alpha, 0), along(*op(alpha, 1), g, 1, true), 0, true);
  }

  VectorXd t2_;
  VectorXd cos_s_;
};

std::unique_ptr<Problem> make_c4(const CaseOptions& o) {
  const int nx = count_for(o, 5);
  const int ny = o.n ? nx : 8 * o.refine;
  auto s = base_spec(CaseId::C4, "2D Volterra integral equation", "volterra-ie-2d",
                     {AxisGrid(0, 0.5, nx), AxisGrid(0, 1, ny)}, 1);
  s.integral_terms = {{"alpha", IntegralKind::Volterra, {0, 1}, 0.0, 0.0, "x*t^2 + cos(s)", "u(t,s)^2"}};
  s.conditions = {point_condition("u(0,0)=0", {0, 0}, 0, 0.0)};
  s.orders = {{"alpha", 1.0}};
  s.order_roles = {{"alpha", quad::OrderRole::Integral}};
  s.trainable_orders = {"alpha"};
  s.forcing = [](std::span<const double> p, int) {
    const double x = p[0];
    const double y = p[1];
    const double sy = std::sin(y);
    return x * sy * (1.0 - x * x * sy * sy / 9.0) + std::pow(x, 6) / 10.0 * (std::sin(2.0 * y) / 2.0 - y);
  };
  return std::make_unique<VolterraIe2D>(std::move(s));
}

// ---------------------------------------------------------------------------
// C5: u(x) = sqrt(pi) (1+x)^{-1.5} - 0.02 x^3/(1+x) + 0.01 x^{2.5} I^{0.5} u(x),  u(0) = sqrt(pi).
class VolterraFie1D final : public GridCase {
 public:
  explicit VolterraFie1D(ProblemSpec s) : GridCase(std::move(s)) {
    const double root_pi = std::sqrt(kPi);
    exact_value_ = [root_pi](std::span<const double> x, int) { return root_pi * std::pow(1.0 + x[0], -1.5); };
    exact_deriv_ = [root_pi](std::span<const double> x, int, int, int order) {
      return order == 1 ? -1.5 * root_pi * std::pow(1.0 + x[0], -2.5) : 3.75 * root_pi * std::pow(1.0 + x[0], -3.5);
    };
    factor_ = (0.01 * coord(0).array().pow(2.5)).matrix();
  }

  std::vector<nn::SampleRequest> residual_requests() const override { return {collocation_request(0, {})}; }

  VectorXd residual(std::span<const nn::DerivBundle> f, const OrderMap& orders) const override {
    const VectorXd u = f[0].value.col(0);
    const VectorXd v = op(require_order(orders, "alpha"), 0)->matrix() * u;
    return u - forcing_.col(0) - (factor_.array() * v.array()).matrix();
  }

  void residual_vjp(std::span<const nn::DerivBundle>, const OrderMap& orders, const VectorXd& rbar,
                    std::span<nn::BundleAdjoint> adj) const override {
    adj[0].value.col(0) += rbar;
    const VectorXd vbar = -(factor_.array() * rbar.array()).matrix();
    adj[0].value.col(0) += op(require_order(orders, "alpha"), 0)->matrix().transpose() * vbar;
  }

 private:
  VectorXd factor_;
};

std::unique_ptr<Problem> make_c5(const CaseOptions& o) {
  const int n = count_for(o, 64);
  auto s = base_spec(CaseId::C5, "1D Volterra fractional integral equation", "volterra-fie-1d",
                     {AxisGrid(0, 4, n)}, 1);
  s.integral_terms = {{"alpha", IntegralKind::Volterra, {0}, 0.0, 0.0, "0.01 x^2.5", "u(t)"}};
  s.conditions = {point_condition("u(0)=sqrt(pi)", {0.0}, 0, std::sqrt(kPi))};
  s.orders = {{"alpha", 0.5}};
  s.order_roles = {{"alpha", quad::OrderRole::Integral}};
  s.trainable_orders = {"alpha"};
  s.forcing = [](std::span<const double> p, int) {
    const double x = p[0];
    return std::sqrt(kPi) * std::pow(1.0 + x, -1.5) - 0.02 * x * x * x / (1.0 + x);
  };
  return std::make_unique<VolterraFie1D>(std::move(s));
}

// ---------------------------------------------------------------------------
// C6: D_y^beta u - u_xx + int_0^y x (y - s) u(x,s) ds = f(x,y),
//     u(-1,y) = u(1,y) = 0, u(x,0) = 0.
// The forcing is the printed one; the solution it manufactures is (1-x^2)(y + y^beta).
class PartialFide2D final : public GridCase {
 public:
  PartialFide2D(ProblemSpec s, double beta) : GridCase(std::move(s)) {
    exact_value_ = [beta](std::span<const double> p, int) {
      return (1.0 - p[0] * p[0]) * (p[1] + std::pow(p[1], beta));
    };
    exact_deriv_ = [beta](std::span<const double> p, int, int axis, int order) {
      const double x = p[0];
      const double y = p[1];
      if (axis == 0) return order == 1 ? -2.0 * x * (y + std::pow(y, beta)) : -2.0 * (y + std::pow(y, beta));
      if (order == 1) return (1.0 - x * x) * (1.0 + beta * std::pow(y, beta - 1.0));
      return (1.0 - x * x) * beta * (beta - 1.0) * std::pow(y, beta - 2.0);
    };
  }

  int skip_axis(const OrderMap&) const override { return 1; }

  std::vector<nn::SampleRequest> residual_requests() const override { return {collocation_request(2, {0})}; }

  VectorXd residual(std::span<const nn::DerivBundle> f, const OrderMap& orders) const override {
    const double alpha = require_order(orders, "alpha");
    const double beta = require_order(orders, "beta");
    check_beta(beta);
    const VectorXd u = f[0].value.col(0);
    const VectorXd x = coord(0);
    const VectorXd y = coord(1);
    const auto iy = op(alpha, 1);
    const VectorXd memory = (x.array() * (y.array() * along(*iy, u, 1).array() -
                                          along(*iy, (y.array() * u.array()).matrix(), 1).array()))
                                .matrix();
    const VectorXd r = along(*op(-beta, 1), u, 1) - f[0].second(0).col(0) + memory - forcing_.col(0);
    return compress({r}, 1);
  }

  void residual_vjp(std::span<const nn::DerivBundle> f, const OrderMap& orders, const VectorXd& rbar,
                    std::span<nn::BundleAdjoint> adj) const override {
    const double alpha = require_order(orders, "alpha");
    const double beta = require_order(orders, "beta");
    const VectorXd rb = expand(rbar, 1)[0];
    const VectorXd x = coord(0);
    const VectorXd y = coord(1);
    const auto iy = op(alpha, 1);
    auto& ub = adj[0].value;
    ub.col(0) += along(*op(-beta, 1), rb, 1, true);
    adj[0].d2[f[0].slot(0)].col(0) -= rb;
    const VectorXd xr = (x.array() * rb.array()).matrix();
    ub.col(0) += along(*iy, (y.array() * xr.array()).matrix(), 1, true);
    ub.col(0).array() -= y.array() * along(*iy, xr, 1, true).array();
  }

 private:
  static void check_beta(double beta) {
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("C6 derivative order must lie in [0, 1)");
  }
};

std::unique_ptr<Problem> make_c6(const CaseOptions& o) {
  const int n = count_for(o, 8);
  const double beta = o.beta.value_or(0.7);
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("C6 beta must lie in (0, 1)");
  const AxisGrid gx(-1, 1, n);
  const AxisGrid gy(0, 1, n);
  auto s = base_spec(CaseId::C6, "2D Volterra partial fractional integro-differential equation",
                     "volterra-pfide-2d", {gx, gy}, 1);
  s.integral_terms = {{"alpha", IntegralKind::Volterra, {1}, 0.0, 0.0, "x*(y-s)", "u(x,s)"}};
  s.derivative_terms = {{"beta", 1, true}};
  const auto zero = [](std::span<const double>) { return 0.0; };
  s.conditions = {face_condition("u(-1,y)=0", 2, 1, gy, {-1.0, 0.0}, boundary_count(gy), 0, zero),
                  face_condition("u(1,y)=0", 2, 1, gy, {1.0, 0.0}, boundary_count(gy), 0, zero),
                  face_condition("u(x,0)=0", 2, 0, gx, {0.0, 0.0}, boundary_count(gx), 0, zero)};
  s.orders = {{"alpha", 1.0}, {"beta", beta}};
  s.order_roles = {{"alpha", quad::OrderRole::Integral}, {"beta", quad::OrderRole::Derivative}};
  s.trainable_orders = {"alpha", "beta"};
  const double g2b = quad::gamma(2.0 - beta);
  const double g1b = quad::gamma(1.0 + beta);
  s.forcing = [beta, g2b, g1b](std::span<const double> p, int) {
    const double x = p[0];
    const double y = p[1];
    const double yb = std::pow(y, beta);
    return (1.0 - x * x) * (std::pow(y, 1.0 - beta) / g2b + g1b) + 2.0 * (y + yb) +
           x * (1.0 - x * x) * (y * y * y / 6.0 + std::pow(y, 2.0 + beta) / ((1.0 + beta) * (2.0 + beta)));
  };
  return std::make_unique<PartialFide2D>(std::move(s), beta);
}

// ---------------------------------------------------------------------------
// C7: system of Volterra FIDEs with kernel (x - t), exact u1 = x^{3b}, u2 = -x^{3b}.
//   D^b u1 - A(x) - I[(x-t)u1] - I[(x-t)u2] = 0
//   D^b u2 + B(x) + A(x) - I[(x-t)u1] + I[(x-t)u2] = 0
// with A = 3 b Gamma(3b) x^{2b} / Gamma(1+2b), B = 2 x^{2+3b} / (2 + 9b + 9b^2).
// The source terms stay at the case's b when the operator orders are trained.
class FideSystem1D final : public GridCase {
 public:
  explicit FideSystem1D(ProblemSpec s) : GridCase(std::move(s)) {}

  void set_exact(double beta) {
    exact_value_ = [beta](std::span<const double> x, int o) {
      const double v = std::pow(x[0], 3.0 * beta);
      return o == 0 ? v : -v;
    };
    exact_deriv_ = [beta](std::span<const double> x, int o, int, int order) {
      const double p = 3.0 * beta;
      const double v = order == 1 ? p * std::pow(x[0], p - 1.0) : p * (p - 1.0) * std::pow(x[0], p - 2.0);
      return o == 0 ? v : -v;
    };
  }

  int skip_axis(const OrderMap&) const override { return 0; }

  std::vector<nn::SampleRequest> residual_requests() const override { return {collocation_request(0, {})}; }

  VectorXd residual(std::span<const nn::DerivBundle> f, const OrderMap& orders) const override {
    const double alpha = require_order(orders, "alpha");
    const double beta = require_order(orders, "beta");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("C7 derivative order must lie in [0, 1)");
    const VectorXd u1 = f[0].value.col(0);
    const VectorXd u2 = f[0].value.col(1);
    const auto ia = op(alpha, 0);
    const auto db = op(-beta, 0);
    const VectorXd i1 = memory(*ia, u1);
    const VectorXd i2 = memory(*ia, u2);
    const VectorXd r1 = db->matrix() * u1 - i1 - i2 - forcing_.col(0);
    const VectorXd r2 = db->matrix() * u2 - i1 + i2 - forcing_.col(1);
    return compress({r1, r2}, 0);
  }

  void residual_vjp(std::span<const nn::DerivBundle>, const OrderMap& orders, const VectorXd& rbar,
                    std::span<nn::BundleAdjoint> adj) const override {
    const double alpha = require_order(orders, "alpha");
    const double beta = require_order(orders, "beta");
    const auto rb = expand(rbar, 0);
    const auto ia = op(alpha, 0);
    const auto db = op(-beta, 0);
    auto& ub = adj[0].value;
    ub.col(0) += db->matrix().transpose() * rb[0];
    ub.col(1) += db->matrix().transpose() * rb[1];
    const VectorXd i1bar = -rb[0] - rb[1];
    const VectorXd i2bar = -rb[0] + rb[1];
    ub.col(0) += memory_t(*ia, i1bar);
    ub.col(1) += memory_t(*ia, i2bar);
  }

 private:
  // I^alpha[(x - t) u(t)] = x * I^alpha[u] - I^alpha[t u]
  VectorXd memory(const VolterraOperator& l, const VectorXd& u) const {
    const VectorXd x = coord(0);
    return (x.array() * (l.matrix() * u).array()).matrix() - l.matrix() * (x.array() * u.array()).matrix();
  }
  VectorXd memory_t(const VolterraOperator& l, const VectorXd& bar) const {
    const VectorXd x = coord(0);
    return l.matrix().transpose() * (x.array() * bar.array()).matrix() -
           (x.array() * (l.matrix().transpose() * bar).array()).matrix();
  }
};

std::unique_ptr<Problem> make_c7(const CaseOptions& o) {
  const int n = count_for(o, 64);
  const double beta = o.beta.value_or(0.5);
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("C7 beta must lie in (0, 1)");
  auto s = base_spec(CaseId::C7, "System of Volterra fractional integro-differential equations",
                     "volterra-fide-system-1d", {AxisGrid(0, 1, n)}, 2);
  s.integral_terms = {{"alpha", IntegralKind::Volterra, {0}, 0.0, 0.0, "(x-t)", "u1(t)"},
                      {"alpha", IntegralKind::Volterra, {0}, 0.0, 0.0, "(x-t)", "u2(t)"}};
  s.derivative_terms = {{"beta", 0, true}};
  s.conditions = {point_condition("u1(0)=0", {0.0}, 0, 0.0), point_condition("u2(0)=0", {0.0}, 1, 0.0)};
  s.orders = {{"alpha", 1.0}, {"beta", beta}};
  s.order_roles = {{"alpha", quad::OrderRole::Integral}, {"beta", quad::OrderRole::Derivative}};
  s.trainable_orders = {"alpha", "beta"};
  const double a_coef = 3.0 * beta * quad::gamma(3.0 * beta) / quad::gamma(1.0 + 2.0 * beta);
  const double b_coef = 2.0 / (2.0 + 9.0 * beta + 9.0 * beta * beta);
  s.forcing = [beta, a_coef, b_coef](std::span<const double> p, int out) {
    const double x = p[0];
    const double a = a_coef * std::pow(x, 2.0 * beta);
    if (out == 0) return a;
    return -(a + b_coef * std::pow(x, 2.0 + 3.0 * beta));
  };
  auto p = std::make_unique<FideSystem1D>(std::move(s));
  p->set_exact(beta);
  return p;
}

// ---------------------------------------------------------------------------
// S1: u(x) = tan x - int_{-pi/3}^{pi/3} e^{arctan x} u(t) dt,  u(-1) = tan(-1).
// S2: u(x) = sin(pi x) + 1/5 int_0^1 cos(pi x) sin(pi t) u(t)^3 dt,  u(0) = (20 - sqrt 391)/3.
class FredholmIe1D final : public GridCase {
 public:
  enum class Variant { Linear, Cubic };

  FredholmIe1D(ProblemSpec s, Variant v, AxisGrid quad_axis)
      : GridCase(std::move(s)), variant_(v), quad_axis_(quad_axis) {
    quad_points_ = ProductGrid({quad_axis_}).points();
    const VectorXd x = coord(0);
    const VectorXd t = quad_points_.col(0);
    if (v == Variant::Linear) {
      outer_ = x.array().atan().exp().matrix();
      inner_ = VectorXd::Ones(t.size());
      exact_value_ = [](std::span<const double> p, int) { return std::tan(p[0]); };
      exact_deriv_ = [](std::span<const double> p, int, int, int order) {
        const double sec2 = 1.0 / (std::cos(p[0]) * std::cos(p[0]));
        return order == 1 ? sec2 : 2.0 * sec2 * std::tan(p[0]);
      };
    } else {
      outer_ = (-0.2 * (kPi * x.array()).cos()).matrix();
      inner_ = (kPi * t.array()).sin().matrix();
      const double c = (20.0 - std::sqrt(391.0)) / 3.0;
      exact_value_ = [c](std::span<const double> p, int) { return std::sin(kPi * p[0]) + c * std::cos(kPi * p[0]); };
      exact_deriv_ = [c](std::span<const double> p, int, int, int order) {
        const double s = std::sin(kPi * p[0]);
        const double co = std::cos(kPi * p[0]);
        return order == 1 ? kPi * (co - c * s) : -kPi * kPi * (s + c * co);
      };
    }
  }

  std::vector<nn::SampleRequest> residual_requests() const override {
    return {collocation_request(0, {}), {quad_points_, 0, {}}};
  }

  VectorXd residual(std::span<const nn::DerivBundle> f, const OrderMap& orders) const override {
    const VectorXd uq = f[1].value.col(0);
    const double integral = weights(orders).dot((inner_.array() * power(uq).array()).matrix());
    return f[0].value.col(0) - forcing_.col(0) + integral * outer_;
  }

  void residual_vjp(std::span<const nn::DerivBundle> f, const OrderMap& orders, const VectorXd& rbar,
                    std::span<nn::BundleAdjoint> adj) const override {
    adj[0].value.col(0) += rbar;
    const double integral_bar = outer_.dot(rbar);
    const VectorXd uq = f[1].value.col(0);
    const VectorXd dpow = variant_ == Variant::Linear ? VectorXd(VectorXd::Ones(uq.size()))
                                                      : VectorXd(3.0 * uq.array().square());
    adj[1].value.col(0).array() += integral_bar * weights(orders).transpose().array() * inner_.array() * dpow.array();
  }

 private:
  Eigen::RowVectorXd weights(const OrderMap& orders) const {
    return axis_operator(require_order(orders, "alpha"), quad_axis_)->endpoint_row();
  }
  VectorXd power(const VectorXd& u) const {
    return variant_ == Variant::Linear ? u : u.array().cube().matrix();
  }

  Variant variant_;
  AxisGrid quad_axis_;
  MatrixXd quad_points_;
  VectorXd outer_;  // coefficient of the integral in the residual (sign included)
  VectorXd inner_;  // integrand factor besides u
};

std::unique_ptr<Problem> make_s1(const CaseOptions& o) {
  const int n = count_for(o, 128);
  auto s = base_spec(CaseId::S1, "1D Fredholm integral equation (tangent)", "fredholm-ie-1d-tan",
                     {AxisGrid(-1, 1, n)}, 1);
  s.integral_terms = {{"alpha", IntegralKind::Fredholm, {0}, -kPi / 3, kPi / 3, "e^{arctan x}", "u(t)"}};
  s.conditions = {point_condition("u(-1)=tan(-1)", {-1.0}, 0, std::tan(-1.0))};
  s.orders = {{"alpha", 1.0}};
  s.order_roles = {{"alpha", quad::OrderRole::Integral}};
  s.trainable_orders = {"alpha"};
  s.forcing = [](std::span<const double> x, int) { return std::tan(x[0]); };
  return std::make_unique<FredholmIe1D>(std::move(s), FredholmIe1D::Variant::Linear, AxisGrid(-kPi / 3, kPi / 3, n));
}

std::unique_ptr<Problem> make_s2(const CaseOptions& o) {
  const int n = count_for(o, 128);
  auto s = base_spec(CaseId::S2, "1D nonlinear Fredholm integral equation (cubic)", "fredholm-ie-1d-cubic",
                     {AxisGrid(0, 2, n)}, 1);
  s.integral_terms = {{"alpha", IntegralKind::Fredholm, {0}, 0.0, 1.0, "cos(pi x) sin(pi t)", "u(t)^3"}};
  const double c = (20.0 - std::sqrt(391.0)) / 3.0;
  s.conditions = {point_condition("u(0)=(20-sqrt(391))/3", {0.0}, 0, c)};
  s.orders = {{"alpha", 1.0}};
  s.order_roles = {{"alpha", quad::OrderRole::Integral}};
  s.trainable_orders = {"alpha"};
  s.forcing = [](std::span<const double> x, int) { return std::sin(kPi * x[0]); };
  return std::make_unique<FredholmIe1D>(std::move(s), FredholmIe1D::Variant::Cubic, AxisGrid(0, 1, std::max(2, n / 2)));
}

}  // namespace

std::unique_ptr<Problem> build_case(CaseId id, const CaseOptions& options) {
  switch (id) {
    case CaseId::C1: return make_c1(options);
    case CaseId::C2: return make_c2_like(CaseId::C2, 1.0, options);
    case CaseId::C3: return make_c3(options);
    case CaseId::C4: return make_c4(options);
    case CaseId::C5: return make_c5(options);
    case CaseId::C6: return make_c6(options);
    case CaseId::C7: return make_c7(options);
    case CaseId::S1: return make_s1(options);
    case CaseId::S2: return make_s2(options);
    case CaseId::S3: return make_c2_like(CaseId::S3, 2.0, options);
  }
  throw ConfigError("unknown case id");
}

std::string case_catalog() {
  std::ostringstream out;
  out << "id\tdims\toutputs\torders\tN\thas_exact\tequation\ttitle\n";
  for (CaseId id : all_cases()) {
    const auto p = build_case(id);
    const auto& s = p->spec();
    out << to_string(id) << '\t' << s.input_dims << '\t' << s.output_dims << '\t';
    bool first = true;
    for (const auto& [name, value] : s.orders) {
      out << (first ? "" : ",") << name << '=' << value;
      first = false;
    }
    out << '\t';
    for (int a = 0; a < s.grid.dims(); ++a) out << (a ? "x" : "") << s.grid.axis(a).count();
    out << '\t' << (s.has_exact ? "yes" : "no") << '\t' << s.equation_tag << '\t' << s.title << '\n';
  }
  return out.str();
}

}  // namespace fides::problems
