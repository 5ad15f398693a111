#ifndef VFO_NN_H_
#define VFO_NN_H_

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vfo/rng.h"

namespace vfo {

using Vec = Eigen::VectorXd;
// Batches are row-major in the sense of one sample per row.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace nn {

enum class Activation { kTanh, kIdentity };

struct Layer {
  Mat weight;  // fan_in x fan_out
  Vec bias;    // fan_out
};

// Per-layer tensors shaped exactly like a DenseNet's parameters. Used for
// gradients and optimizer moments.
struct ParamSet {
  std::vector<Layer> layers;

  void set_zero();
  std::size_t size() const;
  bool all_finite() const;
  Vec flatten() const;
  ParamSet& operator+=(const ParamSet& other);
  ParamSet& operator*=(double scale);
};

// Activations recorded by DenseNet::forward_batch for a later backward pass.
struct Tape {
  Mat input;
  std::vector<Mat> outputs;  // post-activation output of every layer
  bool empty() const { return outputs.empty(); }
};

// Multilayer perceptron: tanh on hidden layers, identity on the output layer
// (configurable for the single-layer case).
class DenseNet {
 public:
  DenseNet() = default;
  // Zero-initialized parameters.
  explicit DenseNet(std::vector<int> dims,
                    Activation hidden = Activation::kTanh,
                    Activation output = Activation::kIdentity);
  // Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static DenseNet glorot(std::vector<int> dims, Rng& rng,
                         Activation hidden = Activation::kTanh,
                         Activation output = Activation::kIdentity);

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  std::size_t num_layers() const { return params_.layers.size(); }
  std::size_t num_parameters() const { return params_.size(); }

  const ParamSet& params() const { return params_; }
  // Replaces all parameters; shapes must agree and values must be finite.
  void set_params(ParamSet params);
  ParamSet zeros_like() const;

  Vec flat_parameters() const { return params_.flatten(); }
  void set_flat_parameters(const Vec& flat);

  Vec forward(const Vec& input) const;
  Mat forward(const Mat& inputs) const;
  // Forward pass that records activations for backward().
  Mat forward(const Mat& inputs, Tape& tape) const;

  // Accumulates nothing; returns parameter gradients for the upstream
  // gradient dL/d(output) (one row per sample). If input_gradient is given it
  // receives dL/d(input).
  ParamSet backward(const Tape& tape, const Mat& upstream,
                    Mat* input_gradient = nullptr) const;

  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }

 private:
  Activation activation_for(std::size_t layer) const;

  std::vector<int> dims_;
  Activation hidden_ = Activation::kTanh;
  Activation output_ = Activation::kIdentity;
  ParamSet params_;
};

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Decoupled (AdamW-style) weight decay; applied as
  // p -= learning_rate * weight_decay * p.
  double weight_decay = 0.0;
};

struct AdamState {
  AdamConfig config;
  ParamSet first_moment;
  ParamSet second_moment;
  long long step = 0;

  static AdamState for_net(const DenseNet& net, AdamConfig config);
};

// One Adam step with bias correction. Throws NumericError on non-finite
// gradients or parameters, leaving net and state untouched.
void adam_update(DenseNet& net, const ParamSet& grads, AdamState& state);

// Immutable copy of a network's parameters, taken at `step`.
class ParameterSnapshot {
 public:
  ParameterSnapshot(const DenseNet& net, long long step)
      : net_(std::make_shared<const DenseNet>(net)), step_(step) {}

  long long step() const { return step_; }
  const DenseNet& net() const { return *net_; }
  Vec forward(const Vec& input) const { return net_->forward(input); }
  Mat forward(const Mat& inputs) const { return net_->forward(inputs); }

 private:
  std::shared_ptr<const DenseNet> net_;
  long long step_;
};

// Takes a snapshot; `step` must be a multiple of `period`.
ParameterSnapshot snapshot(const DenseNet& net, long long step,
                           long long period = 200);

// Central finite differences of `loss` with respect to every parameter of
// `net`. The net is restored before returning.
Vec numerical_gradient(DenseNet& net,
                       const std::function<double(const DenseNet&)>& loss,
                       double perturbation = 1e-6);

// ||a - b|| / max(||a||, ||b||), or 0 when both vanish.
double relative_error(const Vec& analytic, const Vec& numeric);

}  // namespace nn
}  // namespace vfo

#endif  // VFO_NN_H_
