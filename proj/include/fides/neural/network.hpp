#pragma once

/**
 * @file network.hpp
 * @brief Dense tanh network with input-derivative propagation and parameter adjoints.
 *
 * Inputs are passed as (batch x input_dims) matrices, one point per row.
 * Derivatives with respect to inputs are propagated forward as
 * (value, first, diagonal second) triples per requested axis; the parameter
 * gradient of any scalar built from those bundles is obtained by running the
 * recorded propagation backwards (see Network::backward).
 *
 * Parameter layout (flat vector): for each layer, W row-major (out x in) then b.
 */

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fides::nn {

enum class Activation { Tanh, Linear };

/// Network outputs and input derivatives at a batch of points.
/// value and every d1/d2 entry are (batch x outputs); d1[k] and d2[k] belong to axes[k].
struct DerivBundle {
  Eigen::MatrixXd value;
  std::vector<int> axes;
  int max_order = 0;
  std::vector<Eigen::MatrixXd> d1;
  std::vector<Eigen::MatrixXd> d2;

  /// Position of an input axis within `axes`; throws if it was not requested.
  std::size_t slot(int axis) const;
  const Eigen::MatrixXd& first(int axis) const;
  const Eigen::MatrixXd& second(int axis) const;
};

/// Adjoint seeds dL/d(bundle entry), same shapes as the bundle it belongs to.
struct BundleAdjoint {
  Eigen::MatrixXd value;
  std::vector<Eigen::MatrixXd> d1;
  std::vector<Eigen::MatrixXd> d2;

  static BundleAdjoint zeros_like(const DerivBundle& b);
};

/// Points and derivative demand for one network evaluation.
struct SampleRequest {
  Eigen::MatrixXd points;  // batch x input_dims
  int max_order = 0;       // 0, 1 or 2
  std::vector<int> axes;   // input axes differentiated (empty when max_order == 0)
};

class Network;

/// Intermediate quantities of one forward pass, kept for Network::backward.
class ForwardTape {
 public:
  const DerivBundle& bundle() const { return bundle_; }

 private:
  friend class Network;
  struct Layer {
    Eigen::MatrixXd input;                 // features x batch
    std::vector<Eigen::MatrixXd> d_input;  // per axis; empty for the first layer
    std::vector<Eigen::MatrixXd> dd_input;
    Eigen::MatrixXd activated;             // tanh(z) of this layer's pre-activation (hidden layers)
    std::vector<Eigen::MatrixXd> dz;
    std::vector<Eigen::MatrixXd> ddz;
  };
  std::vector<Layer> layers_;
  std::vector<int> axes_;
  int max_order_ = 0;
  DerivBundle bundle_;
};

class Network {
 public:
  /// Zero-initialized network; hidden layers tanh, output linear.
  explicit Network(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dims() const { return sizes_.front(); }
  int output_dims() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  Activation activation(int layer) const {
    return layer + 1 < num_layers() ? Activation::Tanh : Activation::Linear;
  }

  Eigen::MatrixXd& weights(int layer) { return weights_.at(static_cast<std::size_t>(layer)); }
  const Eigen::MatrixXd& weights(int layer) const { return weights_.at(static_cast<std::size_t>(layer)); }
  Eigen::VectorXd& biases(int layer) { return biases_.at(static_cast<std::size_t>(layer)); }
  const Eigen::VectorXd& biases(int layer) const { return biases_.at(static_cast<std::size_t>(layer)); }

  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);

  /// Outputs at each input row: (batch x outputs).
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;

  DerivBundle forward_with_input_derivs(const Eigen::MatrixXd& inputs, int max_order,
                                        std::span<const int> axes) const;
  ForwardTape record(const Eigen::MatrixXd& inputs, int max_order, std::span<const int> axes) const;
  ForwardTape record(const SampleRequest& request) const {
    return record(request.points, request.max_order, request.axes);
  }

  /// Accumulates d(loss)/d(theta) into `grad` given adjoints of the taped bundle.
  void backward(const ForwardTape& tape, const BundleAdjoint& seed, Eigen::VectorXd& grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Glorot-normal weights, N(0, 2/(fan_in+fan_out)), from a seeded mt19937_64; zero biases.
Network init_network(std::vector<int> layer_sizes, std::uint64_t seed);

/// Loss evaluator for param_gradient: reads the bundles (one per request) and
/// writes dL/d(bundle) into the adjoints, returning the loss.
using LossEvaluator = std::function<double(std::span<const DerivBundle>, std::span<BundleAdjoint>)>;

struct GradientResult {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// Reverse-mode gradient of a loss built from network bundles.
/// Throws NonFiniteError when the loss or gradient is not finite.
GradientResult param_gradient(const Network& net, std::span<const SampleRequest> requests,
                              const LossEvaluator& loss);

}  // namespace fides::nn
