#pragma once

/**
 * @file weights.hpp
 * @brief Product-trapezoid weights for Riemann-Liouville operators on uniform grids.
 *
 * For an order a > -1 and upper index n, the integral of order a from x_0 to x_n is
 *
 *     I^a u(x_n) ~= h^a / Gamma(2 + a) * sum_j c_{j,n}(a) u_j
 *
 * with, writing g(k) = k^(1+a),
 *
 *     c_{0,n} = (1+a) n^a - n^(1+a) + (n-1)^(1+a)
 *     c_{j,n} = g(n-j+1) - 2 g(n-j) + g(n-j-1)        0 < j < n
 *     c_{n,n} = 1
 *
 * Negative orders -b (0 <= b < 1) give the RL fractional derivative of order b.
 * The rule integrates the singular kernel exactly against the piecewise-linear
 * interpolant of u, so it is exact for linear u and O(h^2) for smooth u.
 */

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace fides::quad {

enum class OrderRole { Integral, Derivative };

/// An operator order tagged with its role. Integral orders are alpha > 0,
/// derivative orders are 0 <= beta < 1 and are evaluated at quadrature order -beta.
class FracOrder {
 public:
  static FracOrder integral(double alpha);
  static FracOrder derivative(double beta);

  double value() const { return value_; }
  OrderRole role() const { return role_; }
  /// The order handed to the quadrature: alpha, or -beta.
  double quadrature_order() const { return role_ == OrderRole::Integral ? value_ : -value_; }

 private:
  FracOrder(double value, OrderRole role) : value_(value), role_(role) {}
  double value_;
  OrderRole role_;
};

struct WeightRow {
  double order = 0.0;
  int n = 0;
  std::vector<double> weights;  // c_{0,n} .. c_{n,n}
  double prefactor = 1.0;       // h^order / Gamma(2 + order), h = 1 unless set by the caller
};

/// Weight row c_{.,n}(order) with prefactor 1/Gamma(2+order) (unit step).
/// Throws UnsupportedOrderError for order <= -1 and ConfigError for n < 1.
WeightRow quad_weights(double order, int n);

/// All rows 1..max_n for one order. Only O(max_n) powers are evaluated: the
/// interior weights depend on n - j alone.
class WeightTable {
 public:
  WeightTable(double order, int max_n);

  double order() const { return order_; }
  int max_n() const { return max_n_; }
  /// c_{j,n}; requires 0 <= j <= n <= max_n, n >= 1.
  double weight(int j, int n) const;
  WeightRow row(int n) const;
  /// 1 / Gamma(2 + order).
  double unit_prefactor() const { return unit_prefactor_; }

 private:
  double order_;
  int max_n_;
  double unit_prefactor_;
  std::vector<double> first_;   // c_{0,n}, index n
  std::vector<double> second_;  // g(k+1) - 2 g(k) + g(k-1), index k
};

/// Dense lower-triangular matrix L with (L u)_n = RL operator of the given order
/// applied to u_0..u_n, step and prefactor folded in. Row 0 is the identity row
/// at order 0 and zero otherwise (the integral over an empty interval; for
/// negative orders the value at x_0 is undefined and callers must skip that node).
class VolterraOperator {
 public:
  VolterraOperator(double order, int count, double h);

  double order() const { return order_; }
  int count() const { return count_; }
  double step() const { return h_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  /// Weights of the last row: the Fredholm (definite interval) quadrature.
  Eigen::RowVectorXd endpoint_row() const { return matrix_.row(count_); }

 private:
  double order_;
  int count_;
  double h_;
  Eigen::MatrixXd matrix_;
};

/// Thread-safe memo of VolterraOperator by (order, count, step). Lookups take a
/// shared lock; misses build outside the lock and insert-if-absent. Capacity is
/// bounded so inverse runs with drifting orders do not grow it without limit;
/// past capacity, operators are built but not retained.
class WeightCache {
 public:
  explicit WeightCache(std::size_t capacity = 512) : capacity_(capacity) {}

  std::shared_ptr<const VolterraOperator> get(double order, int count, double h);
  std::size_t size() const;
  void clear();

  static WeightCache& global();

 private:
  struct Key {
    std::uint64_t order_bits;
    std::uint64_t step_bits;
    int count;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  std::size_t capacity_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, std::shared_ptr<const VolterraOperator>, KeyHash> map_;
};

}  // namespace fides::quad
