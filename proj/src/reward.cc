#include "vfo/reward.h"

#include <cmath>
#include <stdexcept>

namespace vfo {

namespace {

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

double binary_reward(const Transition& transition) {
  return transition.z == Origin::kExpert ? 1.0 : 0.0;
}

RewardFn binary_reward_fn() {
  return [](const TransitionBatch& batch) {
    Vec r(static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = binary_reward(*batch[i]);
    }
    return r;
  };
}

Discriminator::Discriminator(Normalizer normalizer, nn::DenseNet net)
    : normalizer_(std::move(normalizer)), net_(std::move(net)) {
  if (net_.input_dim() != normalizer_.dim() || net_.output_dim() != 1) {
    throw ShapeError("discriminator must map states to one logit");
  }
}

double Discriminator::logit(const Vec& state) const {
  return net_.forward(normalizer_.apply(state))[0];
}

double Discriminator::probability(const Vec& state) const {
  return sigmoid(logit(state));
}

Vec Discriminator::probabilities(const Mat& states) const {
  const Mat logits = net_.forward(normalizer_.apply(states));
  return logits.col(0).unaryExpr([](double x) { return sigmoid(x); });
}

double Discriminator::loss(const Mat& expert_states, const Mat& background_states) const {
  const Mat le = net_.forward(normalizer_.apply(expert_states));
  const Mat lb = net_.forward(normalizer_.apply(background_states));
  double e = 0.0;
  double b = 0.0;
  // -log sigmoid(x) = softplus(-x); -log(1 - sigmoid(x)) = softplus(x).
  for (Eigen::Index i = 0; i < le.rows(); ++i) e += softplus(-le(i, 0));
  for (Eigen::Index i = 0; i < lb.rows(); ++i) b += softplus(lb(i, 0));
  return e / static_cast<double>(le.rows()) + b / static_cast<double>(lb.rows());
}

nn::ParamSet Discriminator::loss_gradient(const Mat& expert_states,
                                          const Mat& background_states) const {
  const Eigen::Index ne = expert_states.rows();
  const Eigen::Index nb = background_states.rows();
  Mat inputs(ne + nb, expert_states.cols());
  inputs << normalizer_.apply(expert_states), normalizer_.apply(background_states);
  nn::Tape tape;
  const Mat logits = net_.forward(inputs, tape);
  Mat upstream(ne + nb, 1);
  for (Eigen::Index i = 0; i < ne; ++i) {
    upstream(i, 0) = (sigmoid(logits(i, 0)) - 1.0) / static_cast<double>(ne);
  }
  for (Eigen::Index i = 0; i < nb; ++i) {
    upstream(ne + i, 0) = sigmoid(logits(ne + i, 0)) / static_cast<double>(nb);
  }
  return net_.backward(tape, upstream);
}

Discriminator train_discriminator(const Dataset& expert, const Dataset& background,
                                  const Normalizer& normalizer,
                                  const DiscriminatorConfig& config, std::uint64_t seed) {
  const std::vector<Vec> es = all_states(expert);
  const std::vector<Vec> bs = all_states(background);
  if (es.empty() || bs.empty()) {
    throw std::invalid_argument("discriminator needs expert and background states");
  }
  if (config.batch_size < 2) throw std::invalid_argument("discriminator batch must be >= 2");
  Rng rng(seed);
  std::vector<int> dims{normalizer.dim()};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(1);
  Discriminator d(normalizer, nn::DenseNet::glorot(dims, rng));
  nn::AdamState adam = nn::AdamState::for_net(d.net(), config.adam);

  const Mat all_e = stack_rows(es);
  const Mat all_b = stack_rows(bs);
  const std::size_t half = config.batch_size / 2;
  Mat be(static_cast<Eigen::Index>(half), all_e.cols());
  Mat bb(static_cast<Eigen::Index>(config.batch_size - half), all_b.cols());
  for (long long step = 0; step < config.steps; ++step) {
    if (config.eval_every > 0 && step % config.eval_every == 0) {
      d.loss_curve.push_back(d.loss(all_e, all_b));
      if (!std::isfinite(d.loss_curve.back())) {
        throw NumericError("discriminator loss diverged");
      }
    }
    for (Eigen::Index i = 0; i < be.rows(); ++i) {
      be.row(i) = all_e.row(static_cast<Eigen::Index>(uniform_index(rng, es.size())));
    }
    for (Eigen::Index i = 0; i < bb.rows(); ++i) {
      bb.row(i) = all_b.row(static_cast<Eigen::Index>(uniform_index(rng, bs.size())));
    }
    nn::adam_update(d.mutable_net(), d.loss_gradient(be, bb), adam);
  }
  if (config.eval_every > 0) d.loss_curve.push_back(d.loss(all_e, all_b));
  return d;
}

double disc_reward(const Discriminator& d, const Transition& transition) {
  return d.probability(transition.s_next);
}

RewardFn discriminator_reward_fn(std::shared_ptr<const Discriminator> d) {
  return [d = std::move(d)](const TransitionBatch& batch) {
    return Vec(d->probabilities(stack_states(batch, /*next=*/true)));
  };
}

RewardFn env_reward_fn() {
  return [](const TransitionBatch& batch) {
    Vec r(static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!batch[i]->env_reward) {
        throw std::invalid_argument("transition has no environment reward");
      }
      r[static_cast<Eigen::Index>(i)] = *batch[i]->env_reward;
    }
    return r;
  };
}

}  // namespace vfo
