#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "fides/errors.hpp"
#include "fides/neural/network.hpp"
#include "fides/neural/serialize.hpp"

using namespace fides::nn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_points(Eigen::Index n, Eigen::Index d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd p(n, d);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

// Network with nonzero biases so no symmetry hides an indexing slip.
Network perturbed(std::vector<int> sizes, std::uint64_t seed) {
  Network net = init_network(std::move(sizes), seed);
  std::mt19937_64 rng(seed + 99);
  std::normal_distribution<double> n(0.0, 0.3);
  for (int l = 0; l < net.num_layers(); ++l) {
    for (auto& b : net.biases(l)) b = n(rng);
  }
  return net;
}

double rel_err(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

// Loss touching values and every derivative slot, with its adjoint.
double probe_loss(std::span<const DerivBundle> b, std::span<BundleAdjoint> adj) {
  double total = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const MatrixXd w = MatrixXd::Constant(b[k].value.rows(), b[k].value.cols(), 0.7);
    total += 0.5 * b[k].value.squaredNorm() + (w.array() * b[k].value.array()).sum();
    if (!adj.empty()) adj[k].value += b[k].value + w;
    for (std::size_t s = 0; s < b[k].d1.size(); ++s) {
      total += 0.5 * b[k].d1[s].array().cube().sum();
      if (!adj.empty()) adj[k].d1[s] += (1.5 * b[k].d1[s].array().square()).matrix();
    }
    for (std::size_t s = 0; s < b[k].d2.size(); ++s) {
      total += 0.25 * b[k].d2[s].squaredNorm();
      if (!adj.empty()) adj[k].d2[s] += 0.5 * b[k].d2[s];
    }
  }
  return total;
}

}  // namespace

TEST_CASE("input derivatives match central differences") {
  const Network net = perturbed({3, 9, 7, 2}, 5);
  const MatrixXd x = random_points(11, 3, 3);
  const std::vector<int> axes{0, 2, 1};
  const auto b = net.forward_with_input_derivs(x, 2, axes);
  CHECK(rel_err(b.value, net.forward(x)) < 1e-15);
  for (int axis : axes) {
    MatrixXd xp = x, xm = x;
    const double h1 = 1e-5;
    xp.col(axis).array() += h1;
    xm.col(axis).array() -= h1;
    const MatrixXd d1 = (net.forward(xp) - net.forward(xm)) / (2 * h1);
    CHECK(rel_err(b.first(axis), d1) < 1e-5);

    const double h2 = 1e-4;
    xp = x;
    xm = x;
    xp.col(axis).array() += h2;
    xm.col(axis).array() -= h2;
    const MatrixXd d2 = (net.forward(xp) - 2 * net.forward(x) + net.forward(xm)) / (h2 * h2);
    CHECK(rel_err(b.second(axis), d2) < 1e-5);
  }
}

TEST_CASE("parameter gradient matches central differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Network net = perturbed({2, 6, 5, 2}, seed);
    std::vector<SampleRequest> req{{random_points(7, 2, 10 + seed), 2, {1, 0}},
                                   {random_points(4, 2, 20 + seed), 1, {0}},
                                   {random_points(3, 2, 30 + seed), 0, {}}};
    const auto g = param_gradient(net, req, probe_loss);
    const VectorXd theta = net.parameters();
    VectorXd fd(theta.size());
    const double h = 1e-6;
    auto loss_at = [&](const VectorXd& t) {
      Network n2 = net;
      n2.set_parameters(t);
      std::vector<DerivBundle> b;
      for (const auto& r : req) b.push_back(n2.forward_with_input_derivs(r.points, r.max_order, r.axes));
      return probe_loss(b, {});
    };
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      VectorXd tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      fd[i] = (loss_at(tp) - loss_at(tm)) / (2 * h);
    }
    CHECK(rel_err(g.gradient, fd) < 1e-6);
    CHECK(g.loss == doctest::Approx(loss_at(theta)).epsilon(1e-14));
  }
}

TEST_CASE("backward accumulates into the gradient buffer") {
  const Network net = perturbed({1, 4, 1}, 8);
  const auto tape = net.record(random_points(5, 1, 1), 1, std::vector<int>{0});
  auto seed = BundleAdjoint::zeros_like(tape.bundle());
  seed.value.setOnes();
  seed.d1[0].setConstant(0.5);
  VectorXd once = VectorXd::Zero(static_cast<Eigen::Index>(net.parameter_count()));
  net.backward(tape, seed, once);
  VectorXd twice = once;
  net.backward(tape, seed, twice);
  CHECK(rel_err(twice, 2 * once) < 1e-15);
}

TEST_CASE("glorot normal initialisation is seeded and scaled") {
  const Network a = init_network({1, 200, 300, 1}, 42);
  const Network b = init_network({1, 200, 300, 1}, 42);
  const Network c = init_network({1, 200, 300, 1}, 43);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.parameters() != c.parameters());
  const MatrixXd& w = a.weights(1);  // 300 x 200
  const double var = w.squaredNorm() / static_cast<double>(w.size());
  CHECK(var == doctest::Approx(2.0 / 500.0).epsilon(0.03));
  CHECK(a.biases(1).isZero());
}

TEST_CASE("zero biases make the tanh network odd") {
  const Network net = init_network({2, 10, 10, 3}, 4);
  const MatrixXd x = random_points(9, 2, 4);
  CHECK(rel_err(net.forward(-x), -net.forward(x)) < 1e-15);
}

TEST_CASE("flat parameters round-trip and reject wrong sizes") {
  Network net = perturbed({2, 3, 1}, 3);
  CHECK(net.parameter_count() == 2 * 3 + 3 + 3 + 1);
  const VectorXd theta = net.parameters();
  // layer 0: W row-major, then b
  CHECK(theta[1] == net.weights(0)(0, 1));
  CHECK(theta[6] == net.biases(0)[0]);
  net.set_parameters(theta * 2.0);
  CHECK(net.parameters() == theta * 2.0);
  CHECK_THROWS_AS(net.set_parameters(VectorXd::Zero(3)), fides::ShapeError);
  CHECK_THROWS_AS(net.forward(MatrixXd::Zero(2, 3)), fides::ShapeError);
}

TEST_CASE("bundles refuse derivatives that were not requested") {
  const Network net = init_network({2, 3, 1}, 1);
  const auto b = net.forward_with_input_derivs(random_points(2, 2, 1), 1, std::vector<int>{1});
  CHECK_NOTHROW(b.first(1));
  CHECK_THROWS_AS(b.first(0), fides::ConfigError);
  CHECK_THROWS_AS(b.second(1), fides::ConfigError);
}

TEST_CASE("non-finite losses are reported") {
  const Network net = init_network({1, 2, 1}, 1);
  std::vector<SampleRequest> req{{MatrixXd::Ones(2, 1), 0, {}}};
  auto bad = [](std::span<const DerivBundle>, std::span<BundleAdjoint>) { return std::nan(""); };
  CHECK_THROWS_AS(param_gradient(net, req, bad), fides::NonFiniteError);
}

TEST_CASE("snapshots round-trip bit for bit") {
  const Network net = perturbed({3, 5, 4, 2}, 17);
  std::stringstream ss;
  write_snapshot(ss, net);
  const Network back = read_snapshot(ss);
  CHECK(back.layer_sizes() == net.layer_sizes());
  CHECK(back.parameters() == net.parameters());
  std::stringstream truncated(ss.str().substr(0, 10));
  CHECK_THROWS_AS(read_snapshot(truncated), fides::ConfigError);
}
