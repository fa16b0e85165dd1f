#include "fides/fracquad/weights.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "fides/errors.hpp"
#include "fides/fracquad/gamma.hpp"

namespace fides::quad {
namespace {

void check_order(double order) {
  if (!std::isfinite(order)) throw UnsupportedOrderError("quadrature order is not finite");
  if (order <= -1.0) {
    throw UnsupportedOrderError("quadrature order " + std::to_string(order) +
                                " <= -1; split derivative orders >= 1 with split_order first");
  }
}

bool is_small_integer(double p) { return p == std::floor(p) && p >= 0.0 && p <= 8.0; }

// Integer exponents: direct evaluation is exact while k^p stays below 2^53.
bool exact_in_double(double p, double k) { return is_small_integer(p) && std::pow(k + 1.0, p) < 9.0e15; }

// k^p [ (1 + x)^p + (1 - x)^p - 2 ],  x = 1/k, as 2 k^p sum_{m>=1} C(p, 2m) x^{2m}.
double second_difference(double p, int k) {
  const double kd = k;
  if (exact_in_double(p, kd)) {
    return std::pow(kd + 1.0, p) - 2.0 * std::pow(kd, p) + std::pow(kd - 1.0, p);
  }
  if (k == 1) {
    // 2^p - 2 + 0^p
    return 2.0 * std::expm1((p - 1.0) * std::numbers::ln2);
  }
  const double x2 = 1.0 / (kd * kd);
  double binom = 1.0;  // C(p, r)
  double power = 1.0;  // x^{2m}
  double sum = 0.0;
  for (int m = 1; m <= 200; ++m) {
    const int r = 2 * m;
    binom *= (p - (r - 2)) / (r - 1);
    binom *= (p - (r - 1)) / r;
    power *= x2;
    const double term = binom * power;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return 2.0 * std::pow(kd, p) * sum;
}

// (1+a) n^a - n^(1+a) + (n-1)^(1+a) = n^p [ (1-x)^p - 1 + p x ],  x = 1/n, p = 1 + a.
double first_weight(double a, int n) {
  const double p = 1.0 + a;
  const double nd = n;
  if (n == 1) return a;
  if (exact_in_double(p, nd)) {
    return p * std::pow(nd, a) - std::pow(nd, p) + std::pow(nd - 1.0, p);
  }
  const double x = -1.0 / nd;
  double binom = p * (p - 1.0) / 2.0;
  double power = x * x;
  double sum = binom * power;
  for (int r = 3; r <= 400; ++r) {
    binom *= (p - (r - 1)) / r;
    power *= x;
    const double term = binom * power;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return std::pow(nd, p) * sum;
}

}  // namespace

FracOrder FracOrder::integral(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("integral order must be > 0, got " + std::to_string(alpha));
  }
  return {alpha, OrderRole::Integral};
}

FracOrder FracOrder::derivative(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw ConfigError("fractional derivative order must lie in [0, 1), got " + std::to_string(beta));
  }
  return {beta, OrderRole::Derivative};
}

WeightTable::WeightTable(double order, int max_n) : order_(order), max_n_(max_n) {
  check_order(order);
  if (max_n < 1) throw ConfigError("weight table needs n >= 1");
  unit_prefactor_ = 1.0 / gamma(2.0 + order);
  first_.assign(static_cast<std::size_t>(max_n) + 1, 0.0);
  second_.assign(static_cast<std::size_t>(max_n) + 1, 0.0);
  const double p = 1.0 + order;
  for (int n = 1; n <= max_n; ++n) first_[static_cast<std::size_t>(n)] = first_weight(order, n);
  for (int k = 1; k < max_n; ++k) second_[static_cast<std::size_t>(k)] = second_difference(p, k);
}

double WeightTable::weight(int j, int n) const {
  if (j == n) return 1.0;
  if (j == 0) return first_[static_cast<std::size_t>(n)];
  return second_[static_cast<std::size_t>(n - j)];
}

WeightRow WeightTable::row(int n) const {
  if (n < 1 || n > max_n_) throw ConfigError("weight row index out of range");
  WeightRow r;
  r.order = order_;
  r.n = n;
  r.prefactor = unit_prefactor_;
  r.weights.resize(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) r.weights[static_cast<std::size_t>(j)] = weight(j, n);
  return r;
}

WeightRow quad_weights(double order, int n) {
  check_order(order);
  if (n < 1) throw ConfigError("quad_weights: n must be >= 1, got " + std::to_string(n));
  return WeightTable(order, n).row(n);
}

VolterraOperator::VolterraOperator(double order, int count, double h)
    : order_(order), count_(count), h_(h), matrix_(Eigen::MatrixXd::Zero(count + 1, count + 1)) {
  check_order(order);
  if (count < 1) throw ConfigError("VolterraOperator: count must be >= 1");
  if (!(h > 0.0)) throw ConfigError("VolterraOperator: step must be positive");
  const WeightTable table(order, count);
  const double scale = std::pow(h, order) * table.unit_prefactor();
  if (order == 0.0) matrix_(0, 0) = 1.0;
  for (int n = 1; n <= count; ++n) {
    for (int j = 0; j <= n; ++j) matrix_(n, j) = scale * table.weight(j, n);
  }
}

std::size_t WeightCache::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = std::hash<std::uint64_t>{}(k.order_bits);
  h ^= std::hash<std::uint64_t>{}(k.step_bits) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= std::hash<int>{}(k.count) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::shared_ptr<const VolterraOperator> WeightCache::get(double order, int count, double h) {
  const Key key{std::bit_cast<std::uint64_t>(order), std::bit_cast<std::uint64_t>(h), count};
  {
    std::shared_lock lock(mutex_);
    if (auto it = map_.find(key); it != map_.end()) return it->second;
  }
  auto built = std::make_shared<const VolterraOperator>(order, count, h);
  std::unique_lock lock(mutex_);
  if (auto it = map_.find(key); it != map_.end()) return it->second;
  if (map_.size() < capacity_) map_.emplace(key, built);
  return built;
}

std::size_t WeightCache::size() const {
  std::shared_lock lock(mutex_);
  return map_.size();
}

void WeightCache::clear() {
  std::unique_lock lock(mutex_);
  map_.clear();
}

WeightCache& WeightCache::global() {
  static WeightCache cache;
  return cache;
}

}  // namespace fides::quad
