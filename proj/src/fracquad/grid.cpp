#include "fides/fracquad/grid.hpp"

#include <cmath>
#include <string>

#include "fides/errors.hpp"

namespace fides::quad {

AxisGrid::AxisGrid(double start, double stop, int count) : start_(start), stop_(stop), count_(count) {
  if (count < 2) throw ConfigError("AxisGrid: need at least 2 intervals, got " + std::to_string(count));
  if (!(stop > start) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw ConfigError("AxisGrid: bounds must be finite and ascending");
  }
}

double AxisGrid::node(int n) const {
  if (n == count_) return stop_;
  return start_ + n * step();
}

std::vector<double> AxisGrid::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(size()));
  for (int n = 0; n <= count_; ++n) out[static_cast<std::size_t>(n)] = node(n);
  return out;
}

ProductGrid::ProductGrid(std::vector<AxisGrid> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ConfigError("ProductGrid: no axes");
}

std::vector<int> ProductGrid::shape() const {
  std::vector<int> s;
  s.reserve(axes_.size());
  for (const auto& a : axes_) s.push_back(a.size());
  return s;
}

std::size_t ProductGrid::size() const {
  std::size_t n = 1;
  for (const auto& a : axes_) n *= static_cast<std::size_t>(a.size());
  return n;
}

std::size_t ProductGrid::flat_index(std::span<const int> index) const {
  if (index.size() != axes_.size()) throw ShapeError("ProductGrid: index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    if (index[a] < 0 || index[a] >= axes_[a].size()) throw ShapeError("ProductGrid: index out of range");
    flat = flat * static_cast<std::size_t>(axes_[a].size()) + static_cast<std::size_t>(index[a]);
  }
  return flat;
}

std::vector<int> ProductGrid::unflatten(std::size_t flat) const {
  std::vector<int> idx(axes_.size());
  for (std::size_t a = axes_.size(); a-- > 0;) {
    const auto n = static_cast<std::size_t>(axes_[a].size());
    idx[a] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

Eigen::MatrixXd ProductGrid::points() const {
  const std::size_t total = size();
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(total), dims());
  std::vector<std::vector<double>> nodes;
  for (const auto& a : axes_) nodes.push_back(a.nodes());
  for (std::size_t f = 0; f < total; ++f) {
    const auto idx = unflatten(f);
    for (int a = 0; a < dims(); ++a) {
      pts(static_cast<Eigen::Index>(f), a) = nodes[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    }
  }
  return pts;
}

}  // namespace fides::quad
