#include "vfo/value.h"

#include <cmath>
#include <stdexcept>

namespace vfo {

namespace {

std::vector<int> value_dims(int input_dim, const std::vector<int>& hidden) {
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return dims;
}

void check_config(const ValueConfig& c) {
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1)");
  }
  if (c.target_period < 1) throw std::invalid_argument("target_period must be >= 1");
}

}  // namespace

ValueFunction::ValueFunction(Normalizer normalizer, ValueConfig config, Rng& init_rng)
    : ValueFunction(normalizer, config,
                    nn::DenseNet::glorot(value_dims(normalizer.dim(), config.hidden),
                                         init_rng)) {}

ValueFunction::ValueFunction(Normalizer normalizer, ValueConfig config, nn::DenseNet net)
    : normalizer_(std::move(normalizer)),
      config_(std::move(config)),
      net_(std::move(net)),
      adam_(nn::AdamState::for_net(net_, config_.adam)),
      target_(nn::snapshot(net_, 0, config_.target_period)) {
  check_config(config_);
  if (net_.input_dim() != normalizer_.dim() || net_.output_dim() != 1) {
    throw ShapeError("value net must map states to a scalar");
  }
}

double ValueFunction::value(const Vec& state) const {
  return net_.forward(normalizer_.apply(state))[0];
}

Vec ValueFunction::values(const Mat& states) const {
  return net_.forward(normalizer_.apply(states)).col(0);
}

Vec ValueFunction::target_values(const Mat& states) const {
  return target_.forward(normalizer_.apply(states)).col(0);
}

double ValueFunction::td_target(const Transition& transition, double reward) const {
  if (!std::isfinite(reward)) throw std::invalid_argument("non-finite reward");
  if (transition.is_terminal) return reward / (1.0 - config_.gamma);
  return config_.gamma * target_.forward(normalizer_.apply(transition.s_next))[0] + reward;
}

Vec ValueFunction::td_targets(const TransitionBatch& batch, const Vec& rewards) const {
  if (rewards.size() != static_cast<Eigen::Index>(batch.size())) {
    throw ShapeError("one reward per transition required");
  }
  if (!rewards.allFinite()) throw std::invalid_argument("non-finite reward");
  const Vec next_values = target_values(stack_states(batch, /*next=*/true));
  Vec targets(rewards.size());
  for (Eigen::Index i = 0; i < rewards.size(); ++i) {
    targets[i] = batch[static_cast<std::size_t>(i)]->is_terminal
                     ? rewards[i] / (1.0 - config_.gamma)
                     : config_.gamma * next_values[i] + rewards[i];
  }
  return targets;
}

double ValueFunction::advantage(const Transition& transition, double reward) const {
  return td_target(transition, reward) - value(transition.s);
}

Vec ValueFunction::advantages(const TransitionBatch& batch, const Vec& rewards) const {
  return td_targets(batch, rewards) - values(stack_states(batch, /*next=*/false));
}

double ValueFunction::td_loss(const TransitionBatch& batch, const Vec& rewards) const {
  const Vec residual = values(stack_states(batch, false)) - td_targets(batch, rewards);
  return residual.squaredNorm() / static_cast<double>(batch.size());
}

nn::ParamSet ValueFunction::td_loss_gradient(const TransitionBatch& batch,
                                             const Vec& rewards) const {
  const Vec targets = td_targets(batch, rewards);
  nn::Tape tape;
  const Mat pred = net_.forward(normalizer_.apply(stack_states(batch, false)), tape);
  const double n = static_cast<double>(batch.size());
  Mat upstream = (2.0 / n) * (pred.col(0) - targets);
  return net_.backward(tape, upstream);
}

double ValueFunction::value_step(const TransitionBatch& batch, const Vec& rewards) {
  if (batch.empty()) throw std::invalid_argument("empty value batch");
  const Vec targets = td_targets(batch, rewards);
  nn::Tape tape;
  const Mat pred = net_.forward(normalizer_.apply(stack_states(batch, false)), tape);
  const Vec residual = pred.col(0) - targets;
  const double n = static_cast<double>(batch.size());
  const double loss = residual.squaredNorm() / n;
  if (!std::isfinite(loss)) throw NumericError("value loss is not finite");
  Mat upstream = (2.0 / n) * residual;
  nn::adam_update(net_, net_.backward(tape, upstream), adam_);
  if (adam_.step % config_.target_period == 0) {
    target_ = nn::snapshot(net_, adam_.step, config_.target_period);
    ++refreshes_;
  }
  return loss;
}

}  // namespace vfo
