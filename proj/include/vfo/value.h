#ifndef VFO_VALUE_H_
#define VFO_VALUE_H_

#include <optional>
#include <vector>

#include "vfo/data.h"
#include "vfo/nn.h"

namespace vfo {

struct ValueConfig {
  double gamma = 0.99;
  long long target_period = 200;
  std::vector<int> hidden = {64, 64};
  nn::AdamConfig adam;
};

// State-value function v(s) trained on squared TD errors. Bootstrap targets
// come from a target snapshot refreshed every target_period updates; v(s)
// itself always uses the online network.
class ValueFunction {
 public:
  ValueFunction(Normalizer normalizer, ValueConfig config, Rng& init_rng);
  ValueFunction(Normalizer normalizer, ValueConfig config, nn::DenseNet net);

  const ValueConfig& config() const { return config_; }
  double gamma() const { return config_.gamma; }
  const Normalizer& normalizer() const { return normalizer_; }
  const nn::DenseNet& net() const { return net_; }
  const nn::ParameterSnapshot& target() const { return target_; }
  const nn::AdamState& optimizer() const { return adam_; }
  long long updates() const { return adam_.step; }
  // Target refreshes after construction.
  long long refreshes() const { return refreshes_; }

  double value(const Vec& state) const;
  Vec values(const Mat& states) const;
  Vec target_values(const Mat& states) const;

  // gamma * v_target(s') + r, except r / (1 - gamma) for terminal
  // transitions. Truncation boundaries bootstrap through s'.
  double td_target(const Transition& transition, double reward) const;
  Vec td_targets(const TransitionBatch& batch, const Vec& rewards) const;
  // td_target - v_online(s).
  double advantage(const Transition& transition, double reward) const;
  Vec advantages(const TransitionBatch& batch, const Vec& rewards) const;

  // One Adam step on mean (v(s) - target)^2 with targets held fixed.
  // Returns the loss before the update.
  double value_step(const TransitionBatch& batch, const Vec& rewards);

  // Mean squared TD error without updating.
  double td_loss(const TransitionBatch& batch, const Vec& rewards) const;
  // Analytic parameter gradient of td_loss with the target side fixed.
  nn::ParamSet td_loss_gradient(const TransitionBatch& batch, const Vec& rewards) const;

 private:
  Normalizer normalizer_;
  ValueConfig config_;
  nn::DenseNet net_;
  nn::AdamState adam_;
  nn::ParameterSnapshot target_;
  long long refreshes_ = 0;
};

}  // namespace vfo

#endif  // VFO_VALUE_H_
