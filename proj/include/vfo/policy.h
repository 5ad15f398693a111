#ifndef VFO_POLICY_H_
#define VFO_POLICY_H_

#include <vector>

#include "vfo/data.h"
#include "vfo/nn.h"
#include "vfo/reward.h"
#include "vfo/value.h"

namespace vfo {

struct PolicyConfig {
  int num_bins = 101;
  // Gaussian smoothing width in bins; 0 disables smoothing.
  double kernel_bandwidth = 2.0;
  std::vector<int> hidden = {64, 64};
  nn::AdamConfig adam;
};

// Row-stochastic Gaussian smoothing: row i is exp(-(i - j)^2 / (2 bw^2))
// normalized over j.
Mat gaussian_smoothing_matrix(int num_bins, double bandwidth);

// Independent categorical over num_bins uniformly spaced values per action
// dimension. Bin 0 is action_low and bin num_bins - 1 is action_high. The
// network emits action_dim * num_bins logits; softmax probabilities are
// smoothed with a row-stochastic Gaussian kernel before use.
class DiscretizedPolicy {
 public:
  DiscretizedPolicy(Normalizer normalizer, Vec action_low, Vec action_high,
                    PolicyConfig config, Rng& init_rng);
  DiscretizedPolicy(Normalizer normalizer, Vec action_low, Vec action_high,
                    PolicyConfig config, nn::DenseNet net);

  int action_dim() const { return static_cast<int>(low_.size()); }
  int num_bins() const { return config_.num_bins; }
  const PolicyConfig& config() const { return config_; }
  const Normalizer& normalizer() const { return normalizer_; }
  const Vec& action_low() const { return low_; }
  const Vec& action_high() const { return high_; }
  const nn::DenseNet& net() const { return net_; }
  void set_net(nn::DenseNet net);
  const nn::AdamState& optimizer() const { return adam_; }
  const Mat& smoothing() const { return smoothing_; }

  double bin_center(int dim, int bin) const;
  // Nearest bin after clipping to the bounds.
  int bin_index(int dim, double action) const;

  // action_dim x num_bins smoothed probabilities.
  Mat probabilities(const Vec& state) const;
  double log_prob(const Vec& state, const Vec& action) const;
  Vec log_probs(const Mat& states, const Mat& actions) const;
  Vec sample_action(const Vec& state, Rng& rng) const;
  // Bin center of the most probable bin in every dimension.
  Vec mode_action(const Vec& state) const;

  // -mean(w_i * log pi(a_i | s_i)) and its parameter gradient.
  double weighted_nll(const Mat& states, const Mat& actions, const Vec& weights) const;
  nn::ParamSet weighted_nll_gradient(const Mat& states, const Mat& actions,
                                     const Vec& weights) const;
  // One Adam step on weighted_nll; returns the pre-update loss.
  double weighted_nll_step(const Mat& states, const Mat& actions, const Vec& weights);

 private:
  std::vector<int> bins_of(const Mat& actions, Eigen::Index row) const;
  double weighted_nll_impl(const Mat& states, const Mat& actions, const Vec& weights,
                           nn::ParamSet* grads) const;

  Normalizer normalizer_;
  Vec low_;
  Vec high_;
  PolicyConfig config_;
  Mat smoothing_;
  Mat smoothing_cols_;  // transposed, so kernel columns are contiguous rows
  nn::DenseNet net_;
  nn::AdamState adam_;
};

struct AwrConfig {
  double lambda = 1.0;
  double weight_clip = 20.0;
};

// min(exp(advantage / lambda), weight_clip). Overflow of the exponential
// clips; a non-finite advantage throws NumericError.
Vec awr_weights(const Vec& advantages, const AwrConfig& config);

// Behaviour cloning: one step on the mean negative log-likelihood.
double bc_step(DiscretizedPolicy& policy, const Mat& states, const Mat& actions);

struct AwrStepResult {
  double loss = 0.0;
  double mean_weight = 0.0;
};

// Advantage-weighted regression step on background transitions. Weights use
// the value function's current state and carry no gradient.
AwrStepResult awr_step(DiscretizedPolicy& policy, const ValueFunction& vf,
                       const RewardFn& reward_fn, const TransitionBatch& batch,
                       const AwrConfig& config);

Mat stack_actions(const TransitionBatch& batch);

}  // namespace vfo

#endif  // VFO_POLICY_H_
