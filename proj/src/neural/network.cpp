#include "fides/neural/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fides/errors.hpp"

namespace fides::nn {
namespace {

void validate_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw ConfigError("network needs at least an input and an output layer");
  for (int s : sizes) {
    if (s < 1) throw ConfigError("layer sizes must be >= 1");
  }
}

using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXXd;

}  // namespace

std::size_t DerivBundle::slot(int axis) const {
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (axes[k] == axis) return k;
  }
  throw ConfigError("derivative along input axis " + std::to_string(axis) + " was not requested");
}

const Eigen::MatrixXd& DerivBundle::first(int axis) const {
  if (max_order < 1) throw ConfigError("bundle carries no first derivatives");
  return d1[slot(axis)];
}

const Eigen::MatrixXd& DerivBundle::second(int axis) const {
  if (max_order < 2) throw ConfigError("bundle carries no second derivatives");
  return d2[slot(axis)];
}

BundleAdjoint BundleAdjoint::zeros_like(const DerivBundle& b) {
  BundleAdjoint a;
  a.value = Mat::Zero(b.value.rows(), b.value.cols());
  for (std::size_t k = 0; k < b.d1.size(); ++k) a.d1.push_back(Mat::Zero(b.value.rows(), b.value.cols()));
  for (std::size_t k = 0; k < b.d2.size(); ++k) a.d2.push_back(Mat::Zero(b.value.rows(), b.value.cols()));
  return a;
}

Network::Network(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  validate_sizes(sizes_);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.push_back(Mat::Zero(sizes_[l + 1], sizes_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Eigen::VectorXd Network::parameters() const {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const auto& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) theta[k++] = w(r, c);
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) theta[k++] = biases_[l][r];
  }
  return theta;
}

void Network::set_parameters(const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != parameter_count()) {
    throw ShapeError("parameter vector has " + std::to_string(theta.size()) + " entries, network needs " +
                     std::to_string(parameter_count()));
  }
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = theta[k++];
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l][r] = theta[k++];
  }
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& inputs) const {
  if (inputs.cols() != input_dims()) {
    throw ShapeError("input has " + std::to_string(inputs.cols()) + " columns, network expects " +
                     std::to_string(input_dims()));
  }
  Mat h = inputs.transpose();
  for (int l = 0; l < num_layers(); ++l) {
    Mat z = weights(l) * h;
    z.colwise() += biases(l);
    if (activation(l) == Activation::Tanh) {
      h = z.array().tanh().matrix();
    } else {
      h = std::move(z);
    }
  }
  return h.transpose();
}

DerivBundle Network::forward_with_input_derivs(const Eigen::MatrixXd& inputs, int max_order,
                                               std::span<const int> axes) const {
  return record(inputs, max_order, axes).bundle();
}

ForwardTape Network::record(const Eigen::MatrixXd& inputs, int max_order, std::span<const int> axes) const {
  if (inputs.cols() != input_dims()) {
    throw ShapeError("input has " + std::to_string(inputs.cols()) + " columns, network expects " +
                     std::to_string(input_dims()));
  }
  if (max_order < 0 || max_order > 2) throw ConfigError("max_order must be 0, 1 or 2");
  ForwardTape tape;
  tape.max_order_ = max_order;
  if (max_order > 0) {
    for (int a : axes) {
      if (a < 0 || a >= input_dims()) throw ConfigError("derivative axis " + std::to_string(a) + " out of range");
      tape.axes_.push_back(a);
    }
  }
  const std::size_t k = tape.axes_.size();
  const Eigen::Index batch = inputs.rows();

  Mat h = inputs.transpose();
  std::vector<Mat> dh;
  std::vector<Mat> ddh;
  tape.layers_.resize(static_cast<std::size_t>(num_layers()));
  for (int l = 0; l < num_layers(); ++l) {
    const Mat& w = weights(l);
    auto& rec = tape.layers_[static_cast<std::size_t>(l)];
    Mat z = w * h;
    z.colwise() += biases(l);
    rec.dz.resize(k);
    if (max_order >= 2) rec.ddz.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
      if (l == 0) {
        rec.dz[a] = w.col(tape.axes_[a]).replicate(1, batch);
        if (max_order >= 2) rec.ddz[a] = Mat::Zero(w.rows(), batch);
      } else {
        rec.dz[a].noalias() = w * dh[a];
        if (max_order >= 2) rec.ddz[a].noalias() = w * ddh[a];
      }
    }
    rec.input = std::move(h);
    rec.d_input = std::move(dh);
    rec.dd_input = std::move(ddh);
    dh.clear();
    ddh.clear();
    if (activation(l) == Activation::Tanh) {
      const Arr t = z.array().tanh();
      const Arr s1 = 1.0 - t.square();
      const Arr s2 = -2.0 * t * s1;
      for (std::size_t a = 0; a < k; ++a) {
        dh.push_back((s1 * rec.dz[a].array()).matrix());
        if (max_order >= 2) {
          ddh.push_back((s2 * rec.dz[a].array().square() + s1 * rec.ddz[a].array()).matrix());
        }
      }
      rec.activated = t.matrix();
      h = rec.activated;
    } else {
      h = std::move(z);
    }
  }

  DerivBundle& b = tape.bundle_;
  b.max_order = max_order;
  b.axes = tape.axes_;
  b.value = h.transpose();
  const auto& last = tape.layers_.back();
  for (std::size_t a = 0; a < k; ++a) {
    b.d1.push_back(last.dz[a].transpose());
    if (max_order >= 2) b.d2.push_back(last.ddz[a].transpose());
  }
  return tape;
}

void Network::backward(const ForwardTape& tape, const BundleAdjoint& seed, Eigen::VectorXd& grad) const {
  if (static_cast<std::size_t>(grad.size()) != parameter_count()) {
    throw ShapeError("gradient buffer size does not match parameter count");
  }
  const std::size_t k = tape.axes_.size();
  const int order = tape.max_order_;
  const auto& bundle = tape.bundle_;
  if (seed.value.rows() != bundle.value.rows() || seed.value.cols() != bundle.value.cols()) {
    throw ShapeError("adjoint value shape does not match bundle");
  }
  if ((order >= 1 && seed.d1.size() != k) || (order >= 2 && seed.d2.size() != k)) {
    throw ShapeError("adjoint derivative slots do not match bundle");
  }

  Mat zbar = seed.value.transpose();
  std::vector<Mat> dzbar(k);
  std::vector<Mat> ddzbar(order >= 2 ? k : 0);
  for (std::size_t a = 0; a < k; ++a) {
    dzbar[a] = seed.d1[a].transpose();
    if (order >= 2) ddzbar[a] = seed.d2[a].transpose();
  }

  // Offsets of each layer's block in the flat parameter vector.
  std::vector<Eigen::Index> offset(static_cast<std::size_t>(num_layers()) + 1, 0);
  for (int l = 0; l < num_layers(); ++l) {
    offset[static_cast<std::size_t>(l) + 1] =
        offset[static_cast<std::size_t>(l)] + weights(l).size() + biases(l).size();
  }

  for (int l = num_layers() - 1; l >= 0; --l) {
    const Mat& w = weights(l);
    const auto& rec = tape.layers_[static_cast<std::size_t>(l)];
    Mat gw = zbar * rec.input.transpose();
    if (l == 0) {
      for (std::size_t a = 0; a < k; ++a) gw.col(tape.axes_[a]) += dzbar[a].rowwise().sum();
    } else {
      for (std::size_t a = 0; a < k; ++a) {
        gw.noalias() += dzbar[a] * rec.d_input[a].transpose();
        if (order >= 2) gw.noalias() += ddzbar[a] * rec.dd_input[a].transpose();
      }
    }
    const Eigen::VectorXd gb = zbar.rowwise().sum();
    Eigen::Index p = offset[static_cast<std::size_t>(l)];
    for (Eigen::Index r = 0; r < gw.rows(); ++r) {
      for (Eigen::Index c = 0; c < gw.cols(); ++c) grad[p++] += gw(r, c);
    }
    for (Eigen::Index r = 0; r < gb.size(); ++r) grad[p++] += gb[r];
    if (l == 0) break;

    // Through the affine map into the previous layer's activations.
    const Arr hbar = (w.transpose() * zbar).array();
    std::vector<Arr> dhbar(k);
    std::vector<Arr> ddhbar(order >= 2 ? k : 0);
    for (std::size_t a = 0; a < k; ++a) {
      dhbar[a] = (w.transpose() * dzbar[a]).array();
      if (order >= 2) ddhbar[a] = (w.transpose() * ddzbar[a]).array();
    }

    // Through tanh: h = t(z), dh = s1 dz, ddh = s2 dz^2 + s1 ddz.
    const auto& prev = tape.layers_[static_cast<std::size_t>(l) - 1];
    const Arr t = prev.activated.array();
    const Arr s1 = 1.0 - t.square();
    const Arr s2 = -2.0 * t * s1;
    Arr zb = hbar * s1;
    for (std::size_t a = 0; a < k; ++a) {
      const Arr dz = prev.dz[a].array();
      zb += dhbar[a] * s2 * dz;
      if (order >= 2) {
        const Arr s3 = -2.0 * s1.square() + 4.0 * t.square() * s1;
        zb += ddhbar[a] * (s3 * dz.square() + s2 * prev.ddz[a].array());
        dzbar[a] = (dhbar[a] * s1 + ddhbar[a] * 2.0 * s2 * dz).matrix();
        ddzbar[a] = (ddhbar[a] * s1).matrix();
      } else {
        dzbar[a] = (dhbar[a] * s1).matrix();
      }
    }
    zbar = zb.matrix();
  }
}

Network init_network(std::vector<int> layer_sizes, std::uint64_t seed) {
  Network net(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (int l = 0; l < net.num_layers(); ++l) {
    auto& w = net.weights(l);
    const double stddev = std::sqrt(2.0 / static_cast<double>(w.rows() + w.cols()));
    std::normal_distribution<double> dist(0.0, stddev);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
  }
  return net;
}

GradientResult param_gradient(const Network& net, std::span<const SampleRequest> requests,
                              const LossEvaluator& loss) {
  std::vector<ForwardTape> tapes;
  std::vector<DerivBundle> bundles;
  std::vector<BundleAdjoint> adjoints;
  tapes.reserve(requests.size());
  for (const auto& req : requests) {
    tapes.push_back(net.record(req));
    bundles.push_back(tapes.back().bundle());
    adjoints.push_back(BundleAdjoint::zeros_like(bundles.back()));
  }
  GradientResult out;
  out.loss = loss(bundles, adjoints);
  if (!std::isfinite(out.loss)) throw NonFiniteError("loss evaluated to a non-finite value");
  out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.parameter_count()));
  for (std::size_t i = 0; i < tapes.size(); ++i) net.backward(tapes[i], adjoints[i], out.gradient);
  if (!out.gradient.allFinite()) throw NonFiniteError("parameter gradient has non-finite entries");
  return out;
}

}  // namespace fides::nn
