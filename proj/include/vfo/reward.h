#ifndef VFO_REWARD_H_
#define VFO_REWARD_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "vfo/data.h"
#include "vfo/nn.h"

namespace vfo {

// Rewards for a batch of transitions, one entry per transition.
using RewardFn = std::function<Vec(const TransitionBatch&)>;

// 1 for expert transitions, 0 for background ones.
double binary_reward(const Transition& transition);
RewardFn binary_reward_fn();

struct DiscriminatorConfig {
  long long steps = 5000;
  std::size_t batch_size = 256;  // split evenly between expert and background
  std::vector<int> hidden = {64, 64};
  nn::AdamConfig adam;
  // Full-batch loss is recorded every this many steps.
  long long eval_every = 100;
};

// d(s) = sigmoid(logit(s)), trained to output 1 on expert states and 0 on
// background states.
class Discriminator {
 public:
  Discriminator(Normalizer normalizer, nn::DenseNet net);

  const Normalizer& normalizer() const { return normalizer_; }
  const nn::DenseNet& net() const { return net_; }
  nn::DenseNet& mutable_net() { return net_; }

  double logit(const Vec& state) const;
  double probability(const Vec& state) const;
  Vec probabilities(const Mat& states) const;

  // E_{D_E}[-log d(s)] + E_{D_B}[-log(1 - d(s))] on the given state sets.
  double loss(const Mat& expert_states, const Mat& background_states) const;
  nn::ParamSet loss_gradient(const Mat& expert_states,
                             const Mat& background_states) const;

  // Full-batch loss at steps 0, eval_every, 2 * eval_every, ... (training
  // record, empty for untrained discriminators).
  std::vector<double> loss_curve;

 private:
  Normalizer normalizer_;
  nn::DenseNet net_;
};

// Pre-trains a discriminator on all states of D_E and D_B. Throws
// NumericError if the loss diverges.
Discriminator train_discriminator(const Dataset& expert, const Dataset& background,
                                  const Normalizer& normalizer,
                                  const DiscriminatorConfig& config, std::uint64_t seed);

// d(s'), the discriminator output at the transition's next state.
double disc_reward(const Discriminator& d, const Transition& transition);
RewardFn discriminator_reward_fn(std::shared_ptr<const Discriminator> d);

// Stored environment reward. Oracle trainers only; throws when missing.
RewardFn env_reward_fn();

}  // namespace vfo

#endif  // VFO_REWARD_H_
