#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fides::quad {

/// RL operator of the given order evaluated at the last sample:
/// h^order / Gamma(2+order) * sum_j c_{j,n} u_j with n = samples.size() - 1.
/// Positive orders integrate; negative orders -b differentiate to order b.
double rl_value_at(double order, std::span<const double> samples, double h);

/// v_n = rl_value_at(order, u_0..u_n, h) for n = 1..N. v_0 is 0 for nonzero
/// orders and u_0 at order 0; for negative orders v_0 carries no meaning.
std::vector<double> volterra_profile(double order, std::span<const double> samples, double h);

/// Definite integral over the whole sampled interval (a scalar broadcast by callers).
double fredholm_value(double order, std::span<const double> samples, double h);

struct OrderSplit {
  int integer_part;
  double fractional;
};

/// beta = m + beta' with integer m >= 1 and beta' in [0, 1).
OrderSplit split_order(double beta);

/// volterra_profile along every fiber of `axis` of a row-major array with the given shape.
std::vector<double> partial_frac_axis(double order, std::span<const double> grid_values,
                                      std::span<const int> shape, int axis, double h_axis);

/// out = M applied along `axis` (M is (n x n) with n = shape[axis]); M^T when transpose is set.
Eigen::VectorXd apply_along_axis(const Eigen::MatrixXd& op, const Eigen::VectorXd& values,
                                 std::span<const int> shape, int axis, bool transpose = false);

/// Contract `axis` against a weight vector; the result has that axis removed.
Eigen::VectorXd reduce_along_axis(const Eigen::RowVectorXd& weights, const Eigen::VectorXd& values,
                                  std::span<const int> shape, int axis);

}  // namespace fides::quad
