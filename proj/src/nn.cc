#include "vfo/nn.h"

#include <cmath>
#include <sstream>
#include <utility>

namespace vfo::nn {

void ParamSet::set_zero() {
  for (auto& layer : layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
}

std::size_t ParamSet::size() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

bool ParamSet::all_finite() const {
  for (const auto& layer : layers) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

// Layer by layer: weight (row-major), then bias.
Vec ParamSet::flatten() const {
  Vec flat(static_cast<Eigen::Index>(size()));
  Eigen::Index offset = 0;
  for (const auto& layer : layers) {
    const auto w = layer.weight.size();
    flat.segment(offset, w) = Eigen::Map<const Vec>(layer.weight.data(), w);
    offset += w;
    flat.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return flat;
}

ParamSet& ParamSet::operator+=(const ParamSet& other) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

ParamSet& ParamSet::operator*=(double scale) {
  for (auto& layer : layers) {
    layer.weight *= scale;
    layer.bias *= scale;
  }
  return *this;
}

namespace {

bool same_shape(const ParamSet& a, const ParamSet& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].weight.rows() != b.layers[i].weight.rows() ||
        a.layers[i].weight.cols() != b.layers[i].weight.cols() ||
        a.layers[i].bias.size() != b.layers[i].bias.size()) {
      return false;
    }
  }
  return true;
}

// tanh(x) = 1 - 2 / (exp(2x) + 1); Eigen vectorizes exp but not tanh for
// doubles.
void apply_activation(Activation act, Mat& x) {
  if (act == Activation::kTanh) {
    x = (1.0 - 2.0 / ((2.0 * x.array()).exp() + 1.0)).matrix();
  }
}

}  // namespace

DenseNet::DenseNet(std::vector<int> dims, Activation hidden, Activation output)
    : dims_(std::move(dims)), hidden_(hidden), output_(output) {
  if (dims_.size() < 2) throw ShapeError("DenseNet needs at least two dims");
  for (int d : dims_) {
    if (d <= 0) throw ShapeError("DenseNet dims must be positive");
  }
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    params_.layers.push_back(
        {Mat::Zero(dims_[i], dims_[i + 1]), Vec::Zero(dims_[i + 1])});
  }
}

DenseNet DenseNet::glorot(std::vector<int> dims, Rng& rng, Activation hidden,
                          Activation output) {
  DenseNet net(std::move(dims), hidden, output);
  for (auto& layer : net.params_.layers) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.weight.rows() +
                                            layer.weight.cols()));
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = uniform(rng, -limit, limit);
    }
  }
  return net;
}

void DenseNet::set_params(ParamSet params) {
  if (!same_shape(params, params_)) throw ShapeError("parameter shape mismatch");
  if (!params.all_finite()) throw NumericError("non-finite parameter");
  params_ = std::move(params);
}

ParamSet DenseNet::zeros_like() const {
  ParamSet zeros = params_;
  zeros.set_zero();
  return zeros;
}

void DenseNet::set_flat_parameters(const Vec& flat) {
  if (flat.size() != static_cast<Eigen::Index>(num_parameters())) {
    throw ShapeError("flat parameter vector has wrong length");
  }
  if (!flat.allFinite()) throw NumericError("non-finite parameter");
  Eigen::Index offset = 0;
  for (auto& layer : params_.layers) {
    const auto w = layer.weight.size();
    Eigen::Map<Vec>(layer.weight.data(), w) = flat.segment(offset, w);
    offset += w;
    layer.bias = flat.segment(offset, layer.bias.size());
    offset += layer.bias.size();
  }
}

Activation DenseNet::activation_for(std::size_t layer) const {
  return layer + 1 == params_.layers.size() ? output_ : hidden_;
}

Vec DenseNet::forward(const Vec& input) const {
  if (input.size() != input_dim()) {
    std::ostringstream msg;
    msg << "input has " << input.size() << " entries, net expects "
        << input_dim();
    throw ShapeError(msg.str());
  }
  Mat row = input.transpose();
  return forward(row).row(0).transpose();
}

Mat DenseNet::forward(const Mat& inputs) const {
  if (inputs.cols() != input_dim()) {
    throw ShapeError("batch width does not match net input dim");
  }
  Mat x = inputs;
  for (std::size_t i = 0; i < params_.layers.size(); ++i) {
    const auto& layer = params_.layers[i];
    Mat z = x * layer.weight;
    z.rowwise() += layer.bias.transpose();
    apply_activation(activation_for(i), z);
    x = std::move(z);
  }
  return x;
}

Mat DenseNet::forward(const Mat& inputs, Tape& tape) const {
  if (inputs.cols() != input_dim()) {
    throw ShapeError("batch width does not match net input dim");
  }
  tape.input = inputs;
  tape.outputs.clear();
  tape.outputs.reserve(params_.layers.size());
  const Mat* x = &tape.input;
  for (std::size_t i = 0; i < params_.layers.size(); ++i) {
    const auto& layer = params_.layers[i];
    Mat z = (*x) * layer.weight;
    z.rowwise() += layer.bias.transpose();
    apply_activation(activation_for(i), z);
    tape.outputs.push_back(std::move(z));
    x = &tape.outputs.back();
  }
  return tape.outputs.back();
}

ParamSet DenseNet::backward(const Tape& tape, const Mat& upstream,
                            Mat* input_gradient) const {
  if (tape.empty()) throw std::logic_error("backward called without a forward tape");
  if (tape.outputs.size() != params_.layers.size() ||
      tape.input.cols() != input_dim()) {
    throw ShapeError("tape was recorded on a different architecture");
  }
  if (upstream.rows() != tape.input.rows() || upstream.cols() != output_dim()) {
    throw ShapeError("upstream gradient shape mismatch");
  }
  ParamSet grads = zeros_like();
  Mat delta = upstream;
  for (std::size_t li = params_.layers.size(); li-- > 0;) {
    const Mat& out = tape.outputs[li];
    if (activation_for(li) == Activation::kTanh) {
      delta.array() *= (1.0 - out.array().square());
    }
    const Mat& in = li == 0 ? tape.input : tape.outputs[li - 1];
    grads.layers[li].weight.noalias() = in.transpose() * delta;
    grads.layers[li].bias = delta.colwise().sum().transpose();
    if (li > 0 || input_gradient != nullptr) {
      Mat next = delta * params_.layers[li].weight.transpose();
      delta = std::move(next);
    }
  }
  if (input_gradient != nullptr) *input_gradient = std::move(delta);
  return grads;
}

AdamState AdamState::for_net(const DenseNet& net, AdamConfig config) {
  if (!(config.learning_rate > 0) || !(config.beta1 > 0) ||
      !(config.beta2 > 0) || !(config.epsilon > 0) || config.beta1 >= 1 ||
      config.beta2 >= 1 || config.weight_decay < 0) {
    throw std::invalid_argument("invalid Adam configuration");
  }
  AdamState state;
  state.config = config;
  state.first_moment = net.zeros_like();
  state.second_moment = net.zeros_like();
  return state;
}

void adam_update(DenseNet& net, const ParamSet& grads, AdamState& state) {
  if (!same_shape(grads, net.params()) ||
      !same_shape(state.first_moment, net.params())) {
    throw ShapeError("gradient or optimizer state does not match the net");
  }
  if (!grads.all_finite()) throw NumericError("non-finite gradient");

  const auto& cfg = state.config;
  const long long t = state.step + 1;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  const double decay = 1.0 - cfg.learning_rate * cfg.weight_decay;

  ParamSet m = state.first_moment;
  ParamSet v = state.second_moment;
  ParamSet p = net.params();
  auto update = [&](auto& param, auto& m1, auto& m2, const auto& g) {
    m1.array() = cfg.beta1 * m1.array() + (1.0 - cfg.beta1) * g.array();
    m2.array() = cfg.beta2 * m2.array() + (1.0 - cfg.beta2) * g.array().square();
    param.array() = decay * param.array() -
                    cfg.learning_rate * (m1.array() / bias1) /
                        ((m2.array() / bias2).sqrt() + cfg.epsilon);
  };
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    update(p.layers[i].weight, m.layers[i].weight, v.layers[i].weight,
           grads.layers[i].weight);
    update(p.layers[i].bias, m.layers[i].bias, v.layers[i].bias,
           grads.layers[i].bias);
  }
  if (!p.all_finite()) throw NumericError("Adam step produced a non-finite parameter");
  net.set_params(std::move(p));
  state.first_moment = std::move(m);
  state.second_moment = std::move(v);
  state.step = t;
}

ParameterSnapshot snapshot(const DenseNet& net, long long step,
                           long long period) {
  if (period <= 0 || step < 0 || step % period != 0) {
    throw std::invalid_argument("snapshot step must be a multiple of the period");
  }
  return ParameterSnapshot(net, step);
}

Vec numerical_gradient(DenseNet& net,
                       const std::function<double(const DenseNet&)>& loss,
                       double perturbation) {
  const Vec base = net.flat_parameters();
  Vec grad(base.size());
  Vec probe = base;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    probe[i] = base[i] + perturbation;
    net.set_flat_parameters(probe);
    const double up = loss(net);
    probe[i] = base[i] - perturbation;
    net.set_flat_parameters(probe);
    const double down = loss(net);
    probe[i] = base[i];
    grad[i] = (up - down) / (2.0 * perturbation);
  }
  net.set_flat_parameters(base);
  return grad;
}

double relative_error(const Vec& analytic, const Vec& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).norm() / scale;
}

}  // namespace vfo::nn
