#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fides/errors.hpp"
#include "fides/fracquad/gamma.hpp"
#include "fides/fracquad/rl.hpp"
#include "fides/fracquad/weights.hpp"

using namespace fides::quad;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

const std::vector<double> kOrders{-0.7, -0.5, 0.0, 0.5, 1.0, 1.5};

// Direct formula in 50-digit arithmetic; cancellation is harmless at this precision.
big oracle_weight(double a, int j, int n) {
  const big p = big(a) + 1;
  auto g = [&](int k) { return k == 0 ? big(0) : boost::multiprecision::pow(big(k), p); };
  if (j == n) return 1;
  if (j == 0) return (1 + big(a)) * boost::multiprecision::pow(big(n), big(a)) - g(n) + g(n - 1);
  return g(n - j + 1) - 2 * g(n - j) + g(n - j - 1);
}

double max_error(double a, int k, int n) {
  const double h = 1.0 / n;
  std::vector<double> u(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) u[static_cast<std::size_t>(i)] = std::pow(i * h, k);
  const auto v = volterra_profile(a, u, h);
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    const double exact = fides::quad::gamma(k + 1.0) / fides::quad::gamma(k + 1.0 + a) * std::pow(x, k + a);
    worst = std::max(worst, std::abs(v[static_cast<std::size_t>(i)] - exact));
  }
  return worst;
}

}  // namespace

TEST_CASE("weight sum identity: sum_j c_{j,n} = (1+a) n^a") {
  for (double a : kOrders) {
    const WeightTable table(a, 256);
    for (int n = 1; n <= 256; ++n) {
      const auto row = table.row(n);
      double sum = 0.0;
      for (double c : row.weights) sum += c;
      const double expect = (1.0 + a) * std::pow(n, a);
      INFO("a = " << a << ", n = " << n);
      CHECK(std::abs(sum - expect) <= 1e-9 * std::abs(expect));
    }
  }
}

TEST_CASE("weights match the 50-digit direct formula") {
  for (double a : {-0.7, -0.5, -0.1, 0.3, 0.5, 1.5, 2.25}) {
    const WeightTable table(a, 300);
    for (int n : {1, 2, 3, 7, 64, 300}) {
      for (int j = 0; j <= n; ++j) {
        const double ref = static_cast<double>(oracle_weight(a, j, n));
        INFO("a = " << a << ", j = " << j << ", n = " << n);
        CHECK(std::abs(table.weight(j, n) - ref) <= 1e-13 * std::max(std::abs(ref), 1e-300));
      }
    }
  }
}

TEST_CASE("weights are nonnegative for nonnegative orders") {
  for (double a : {0.0, 0.1, 0.5, 0.9, 1.0, 1.5, 3.0}) {
    const WeightTable table(a, 128);
    for (int n = 1; n <= 128; ++n) {
      for (int j = 0; j <= n; ++j) CHECK(table.weight(j, n) >= 0.0);
    }
  }
}

TEST_CASE("order zero is the identity, exactly") {
  const VolterraOperator op(0.0, 40, 0.025);
  CHECK(op.matrix() == Eigen::MatrixXd::Identity(41, 41));
  std::vector<double> u{0.3, -1.7, 2.9, 1e-7, 4.25};
  CHECK(rl_value_at(0.0, u, 0.1) == u.back());
}

TEST_CASE("order one reduces to the trapezoid rule bit for bit") {
  const int n = 97;
  const double h = 0.0131;
  std::vector<double> u(n + 1);
  for (int i = 0; i <= n; ++i) u[static_cast<std::size_t>(i)] = std::sin(1.3 * i * h) + std::exp(-i * h);
  double s = u.front();
  for (int i = 1; i < n; ++i) s += 2.0 * u[static_cast<std::size_t>(i)];
  s += u.back();
  CHECK(rl_value_at(1.0, u, h) == h * 0.5 * s);
  for (int j = 1; j < n; ++j) CHECK(quad_weights(1.0, n).weights[static_cast<std::size_t>(j)] == 2.0);
}

TEST_CASE("integral orders converge at O(h^2) on monomials") {
  for (double a : {0.25, 0.5, 1.0, 1.5}) {
    for (int k : {2, 3}) {
      const double ratio = max_error(a, k, 64) / max_error(a, k, 128);
      INFO("a = " << a << ", k = " << k << ", ratio = " << ratio);
      CHECK(ratio >= 3.5);
      CHECK(ratio <= 4.5);
    }
  }
}

TEST_CASE("derivative orders converge at O(h^(2-beta)) on monomials") {
  for (double beta : {0.3, 0.5, 0.7}) {
    const double ratio = max_error(-beta, 2, 64) / max_error(-beta, 2, 128);
    const double expect = std::pow(2.0, 2.0 - beta);
    INFO("beta = " << beta << ", ratio = " << ratio);
    CHECK(ratio == doctest::Approx(expect).epsilon(0.05));
  }
}

TEST_CASE("linear functions are integrated exactly at every order") {
  const int n = 50;
  const double h = 0.02;
  std::vector<double> u(n + 1);
  for (int i = 0; i <= n; ++i) u[static_cast<std::size_t>(i)] = 2.0 + 3.0 * i * h;
  for (double a : {-0.6, 0.4, 1.0, 2.0}) {
    const auto v = volterra_profile(a, u, h);
    for (int i = 1; i <= n; ++i) {
      const double x = i * h;
      const double exact = 2.0 * std::pow(x, a) / fides::quad::gamma(1.0 + a) + 3.0 * std::pow(x, 1.0 + a) / fides::quad::gamma(2.0 + a);
      CHECK(v[static_cast<std::size_t>(i)] == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("operator rows equal single-point evaluations") {
  const int n = 33;
  const double h = 0.07;
  const VolterraOperator op(0.6, n, h);
  std::vector<double> u(n + 1);
  for (int i = 0; i <= n; ++i) u[static_cast<std::size_t>(i)] = std::cos(i * h);
  const Eigen::Map<const Eigen::VectorXd> uv(u.data(), n + 1);
  const Eigen::VectorXd all = op.matrix() * uv;
  for (int m = 1; m <= n; ++m) {
    const std::span<const double> head(u.data(), static_cast<std::size_t>(m) + 1);
    CHECK(all[m] == doctest::Approx(rl_value_at(0.6, head, h)).epsilon(1e-13));
  }
  CHECK(op.endpoint_row().size() == n + 1);
}

TEST_CASE("unsupported orders are rejected") {
  CHECK_THROWS_AS(quad_weights(-1.0, 4), fides::UnsupportedOrderError);
  CHECK_THROWS_AS(VolterraOperator(-1.5, 8, 0.1), fides::UnsupportedOrderError);
  CHECK_THROWS_AS(FracOrder::derivative(1.2), std::exception);
  CHECK_THROWS_AS(FracOrder::integral(0.0), std::exception);
  CHECK(FracOrder::derivative(0.4).quadrature_order() == -0.4);
}

TEST_CASE("the cache hands back one shared operator per key") {
  WeightCache cache(4);
  const auto a = cache.get(0.5, 16, 0.1);
  const auto b = cache.get(0.5, 16, 0.1);
  CHECK(a.get() == b.get());
  CHECK(cache.get(0.5, 16, 0.2).get() != a.get());
  for (int i = 0; i < 10; ++i) cache.get(0.1 * (i + 1), 8, 0.1);
  CHECK(cache.size() == 4);
}
