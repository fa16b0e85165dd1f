#include "fides/fracquad/rl.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fides/errors.hpp"
#include "fides/fracquad/weights.hpp"

namespace fides::quad {
namespace {

void check_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("quadrature step must be positive and finite");
}

double weighted_sum(const WeightTable& table, int n, std::span<const double> u) {
  double acc = 0.0;
  for (int j = 0; j <= n; ++j) acc += table.weight(j, n) * u[static_cast<std::size_t>(j)];
  return acc;
}

struct AxisLayout {
  std::size_t outer = 1;   // product of extents before the axis
  std::size_t length = 0;  // extent of the axis
  std::size_t inner = 1;   // product of extents after the axis (stride)
};

AxisLayout layout(std::span<const int> shape, int axis, std::size_t total) {
  if (axis < 0 || static_cast<std::size_t>(axis) >= shape.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(shape.size()));
  }
  AxisLayout l;
  std::size_t prod = 1;
  for (std::size_t a = 0; a < shape.size(); ++a) {
    if (shape[a] < 1) throw ShapeError("non-positive extent in shape");
    const auto e = static_cast<std::size_t>(shape[a]);
    prod *= e;
    if (a < static_cast<std::size_t>(axis)) l.outer *= e;
    if (a > static_cast<std::size_t>(axis)) l.inner *= e;
  }
  l.length = static_cast<std::size_t>(shape[static_cast<std::size_t>(axis)]);
  if (prod != total) {
    throw ShapeError("array of " + std::to_string(total) + " values does not match shape of " +
                     std::to_string(prod) + " nodes");
  }
  return l;
}

}  // namespace

double rl_value_at(double order, std::span<const double> samples, double h) {
  check_step(h);
  if (samples.size() < 2) throw ConfigError("rl_value_at: needs at least two samples");
  const int n = static_cast<int>(samples.size()) - 1;
  const WeightTable table(order, n);
  return std::pow(h, order) * table.unit_prefactor() * weighted_sum(table, n, samples);
}

std::vector<double> volterra_profile(double order, std::span<const double> samples, double h) {
  check_step(h);
  if (samples.size() < 2) throw ConfigError("volterra_profile: needs at least two samples");
  const int count = static_cast<int>(samples.size()) - 1;
  const WeightTable table(order, count);
  const double scale = std::pow(h, order) * table.unit_prefactor();
  std::vector<double> v(samples.size(), 0.0);
  if (order == 0.0) v[0] = samples[0];
  for (int n = 1; n <= count; ++n) v[static_cast<std::size_t>(n)] = scale * weighted_sum(table, n, samples);
  return v;
}

double fredholm_value(double order, std::span<const double> samples, double h) {
  return rl_value_at(order, samples, h);
}

OrderSplit split_order(double beta) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) {
    throw ConfigError("split_order: expects beta >= 1, got " + std::to_string(beta));
  }
  const double m = std::floor(beta);
  return {static_cast<int>(m), beta - m};
}

std::vector<double> partial_frac_axis(double order, std::span<const double> grid_values,
                                      std::span<const int> shape, int axis, double h_axis) {
  const AxisLayout l = layout(shape, axis, grid_values.size());
  std::vector<double> out(grid_values.size());
  std::vector<double> fiber(l.length);
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t i = 0; i < l.inner; ++i) {
      const std::size_t base = o * l.length * l.inner + i;
      for (std::size_t k = 0; k < l.length; ++k) fiber[k] = grid_values[base + k * l.inner];
      const auto prof = volterra_profile(order, fiber, h_axis);
      for (std::size_t k = 0; k < l.length; ++k) out[base + k * l.inner] = prof[k];
    }
  }
  return out;
}

Eigen::VectorXd apply_along_axis(const Eigen::MatrixXd& op, const Eigen::VectorXd& values,
                                 std::span<const int> shape, int axis, bool transpose) {
  const AxisLayout l = layout(shape, axis, static_cast<std::size_t>(values.size()));
  const auto len = static_cast<Eigen::Index>(l.length);
  if (op.rows() != len || op.cols() != len) throw ShapeError("axis operator size does not match axis extent");
  Eigen::VectorXd out(values.size());
  // View each outer block as a (length x inner) column-major-strided matrix.
  for (std::size_t o = 0; o < l.outer; ++o) {
    const auto offset = static_cast<Eigen::Index>(o * l.length * l.inner);
    using Block = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using MutBlock = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    Block in(values.data() + offset, len, static_cast<Eigen::Index>(l.inner));
    MutBlock res(out.data() + offset, len, static_cast<Eigen::Index>(l.inner));
    if (transpose) {
      res.noalias() = op.transpose() * in;
    } else {
      res.noalias() = op * in;
    }
  }
  return out;
}

Eigen::VectorXd reduce_along_axis(const Eigen::RowVectorXd& weights, const Eigen::VectorXd& values,
                                  std::span<const int> shape, int axis) {
  const AxisLayout l = layout(shape, axis, static_cast<std::size_t>(values.size()));
  const auto len = static_cast<Eigen::Index>(l.length);
  if (weights.size() != len) throw ShapeError("reduction weights do not match axis extent");
  Eigen::VectorXd out(static_cast<Eigen::Index>(l.outer * l.inner));
  for (std::size_t o = 0; o < l.outer; ++o) {
    const auto offset = static_cast<Eigen::Index>(o * l.length * l.inner);
    using Block = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    Block in(values.data() + offset, len, static_cast<Eigen::Index>(l.inner));
    out.segment(static_cast<Eigen::Index>(o * l.inner), static_cast<Eigen::Index>(l.inner)) =
        (weights * in).transpose();
  }
  return out;
}

}  // namespace fides::quad
