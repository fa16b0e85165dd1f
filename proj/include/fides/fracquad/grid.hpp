#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fides::quad {

/// Uniform ascending nodes x_n = start + n*h, n = 0..count, h = (stop - start)/count.
class AxisGrid {
 public:
  AxisGrid(double start, double stop, int count);

  double start() const { return start_; }
  double stop() const { return stop_; }
  /// Number of intervals.
  int count() const { return count_; }
  /// Number of nodes (count + 1).
  int size() const { return count_ + 1; }
  double step() const { return (stop_ - start_) / count_; }
  double node(int n) const;
  std::vector<double> nodes() const;

 private:
  double start_;
  double stop_;
  int count_;
};

/// Tensor product of axis grids. Flat storage is row-major: the last axis varies fastest.
class ProductGrid {
 public:
  explicit ProductGrid(std::vector<AxisGrid> axes);

  int dims() const { return static_cast<int>(axes_.size()); }
  const AxisGrid& axis(int a) const { return axes_.at(static_cast<std::size_t>(a)); }
  const std::vector<AxisGrid>& axes() const { return axes_; }
  std::vector<int> shape() const;
  std::size_t size() const;

  std::size_t flat_index(std::span<const int> index) const;
  std::vector<int> unflatten(std::size_t flat) const;

  /// All nodes as a (size x dims) matrix in flat order.
  Eigen::MatrixXd points() const;

 private:
  std::vector<AxisGrid> axes_;
};

}  // namespace fides::quad
