#include "vfo/policy.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vfo {

Mat gaussian_smoothing_matrix(int num_bins, double bandwidth) {
  if (num_bins < 2) throw std::invalid_argument("need at least two bins");
  if (!(bandwidth >= 0.0)) throw std::invalid_argument("bandwidth must be >= 0");
  Mat k = Mat::Identity(num_bins, num_bins);
  if (bandwidth == 0.0) return k;
  const double denom = 2.0 * bandwidth * bandwidth;
  for (int i = 0; i < num_bins; ++i) {
    for (int j = 0; j < num_bins; ++j) {
      const double d = static_cast<double>(i - j);
      k(i, j) = std::exp(-d * d / denom);
    }
    k.row(i) /= k.row(i).sum();
  }
  return k;
}

namespace {

std::vector<int> policy_dims(int input_dim, int outputs, const std::vector<int>& hidden) {
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(outputs);
  return dims;
}

// Numerically stable softmax of a row segment.
Eigen::RowVectorXd softmax(const Eigen::Ref<const Eigen::RowVectorXd>& logits) {
  Eigen::RowVectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

}  // namespace

DiscretizedPolicy::DiscretizedPolicy(Normalizer normalizer, Vec action_low,
                                     Vec action_high, PolicyConfig config,
                                     Rng& init_rng)
    : DiscretizedPolicy(normalizer, action_low, action_high, config,
                        nn::DenseNet::glorot(
                            policy_dims(normalizer.dim(),
                                        static_cast<int>(action_low.size()) * config.num_bins,
                                        config.hidden),
                            init_rng)) {}

DiscretizedPolicy::DiscretizedPolicy(Normalizer normalizer, Vec action_low,
                                     Vec action_high, PolicyConfig config,
                                     nn::DenseNet net)
    : normalizer_(std::move(normalizer)),
      low_(std::move(action_low)),
      high_(std::move(action_high)),
      config_(std::move(config)),
      smoothing_(gaussian_smoothing_matrix(config_.num_bins, config_.kernel_bandwidth)),
      smoothing_cols_(smoothing_.transpose()),
      net_(std::move(net)),
      adam_(nn::AdamState::for_net(net_, config_.adam)) {
  if (low_.size() != high_.size() || low_.size() == 0) {
    throw ShapeError("action bounds must be non-empty and congruent");
  }
  if ((low_.array() >= high_.array()).any()) {
    throw std::invalid_argument("action_low must be below action_high");
  }
  if (net_.input_dim() != normalizer_.dim() ||
      net_.output_dim() != action_dim() * config_.num_bins) {
    throw ShapeError("policy net shape does not match bins and state dim");
  }
}

void DiscretizedPolicy::set_net(nn::DenseNet net) {
  if (net.dims() != net_.dims()) throw ShapeError("policy net shape mismatch");
  net_ = std::move(net);
  adam_ = nn::AdamState::for_net(net_, config_.adam);
}

double DiscretizedPolicy::bin_center(int dim, int bin) const {
  const double frac = static_cast<double>(bin) / static_cast<double>(config_.num_bins - 1);
  return low_[dim] + frac * (high_[dim] - low_[dim]);
}

int DiscretizedPolicy::bin_index(int dim, double action) const {
  const double a = std::clamp(action, low_[dim], high_[dim]);
  const double frac = (a - low_[dim]) / (high_[dim] - low_[dim]);
  const long bin = std::lround(frac * static_cast<double>(config_.num_bins - 1));
  return static_cast<int>(std::clamp<long>(bin, 0, config_.num_bins - 1));
}

std::vector<int> DiscretizedPolicy::bins_of(const Mat& actions, Eigen::Index row) const {
  std::vector<int> bins(static_cast<std::size_t>(action_dim()));
  for (int d = 0; d < action_dim(); ++d) bins[d] = bin_index(d, actions(row, d));
  return bins;
}

Mat DiscretizedPolicy::probabilities(const Vec& state) const {
  const Vec logits = net_.forward(normalizer_.apply(state));
  const int nb = config_.num_bins;
  Mat probs(action_dim(), nb);
  for (int d = 0; d < action_dim(); ++d) {
    const Eigen::RowVectorXd p = softmax(logits.segment(d * nb, nb).transpose());
    probs.row(d) = p * smoothing_;
  }
  return probs;
}

double DiscretizedPolicy::log_prob(const Vec& state, const Vec& action) const {
  if (action.size() != action_dim()) throw ShapeError("action dimension mismatch");
  const Mat probs = probabilities(state);
  double lp = 0.0;
  for (int d = 0; d < action_dim(); ++d) lp += std::log(probs(d, bin_index(d, action[d])));
  return lp;
}

Vec DiscretizedPolicy::log_probs(const Mat& states, const Mat& actions) const {
  if (actions.rows() != states.rows() || actions.cols() != action_dim()) {
    throw ShapeError("actions do not match states");
  }
  const Mat logits = net_.forward(normalizer_.apply(states));
  const int nb = config_.num_bins;
  Vec out(states.rows());
  for (Eigen::Index n = 0; n < states.rows(); ++n) {
    const auto bins = bins_of(actions, n);
    double lp = 0.0;
    for (int d = 0; d < action_dim(); ++d) {
      const Eigen::RowVectorXd p = softmax(logits.row(n).segment(d * nb, nb));
      lp += std::log(p.dot(smoothing_cols_.row(bins[d])));
    }
    out[n] = lp;
  }
  return out;
}

Vec DiscretizedPolicy::sample_action(const Vec& state, Rng& rng) const {
  const Mat probs = probabilities(state);
  Vec action(action_dim());
  for (int d = 0; d < action_dim(); ++d) {
    const double u = uniform01(rng);
    double cum = 0.0;
    int bin = config_.num_bins - 1;
    for (int b = 0; b < config_.num_bins; ++b) {
      cum += probs(d, b);
      if (u < cum) {
        bin = b;
        break;
      }
    }
    action[d] = bin_center(d, bin);
  }
  return action;
}

Vec DiscretizedPolicy::mode_action(const Vec& state) const {
  const Mat probs = probabilities(state);
  Vec action(action_dim());
  for (int d = 0; d < action_dim(); ++d) {
    Eigen::Index bin = 0;
    probs.row(d).maxCoeff(&bin);
    action[d] = bin_center(d, static_cast<int>(bin));
  }
  return action;
}

// For q_b = sum_i softmax(l)_i K_ib: d log q_b / d l_m = p_m (K_mb / q_b - 1).
double DiscretizedPolicy::weighted_nll_impl(const Mat& states, const Mat& actions,
                                            const Vec& weights,
                                            nn::ParamSet* grads) const {
  const Eigen::Index n = states.rows();
  if (n == 0) throw std::invalid_argument("empty policy batch");
  if (actions.rows() != n || actions.cols() != action_dim() || weights.size() != n) {
    throw ShapeError("policy batch shape mismatch");
  }
  const int nb = config_.num_bins;
  nn::Tape tape;
  const Mat x = normalizer_.apply(states);
  const Mat logits = grads ? net_.forward(x, tape) : net_.forward(x);
  Mat upstream;
  if (grads) upstream.resize(n, logits.cols());
  const Vec scaled_w = weights / static_cast<double>(n);
  double loss = 0.0;
  Mat probs(n, nb);
  Mat kcols(n, nb);
  Vec q(n);
  for (int d = 0; d < action_dim(); ++d) {
    probs = logits.middleCols(d * nb, nb);
    const Vec row_max = probs.rowwise().maxCoeff();
    probs.colwise() -= row_max;
    probs = probs.array().exp().matrix();
    const Vec row_sum = probs.rowwise().sum();
    probs.array().colwise() /= row_sum.array();
    for (Eigen::Index i = 0; i < n; ++i) {
      kcols.row(i) = smoothing_cols_.row(bin_index(d, actions(i, d)));
    }
    q = probs.cwiseProduct(kcols).rowwise().sum();
    loss -= scaled_w.dot(q.array().log().matrix());
    if (grads) {
      kcols.array().colwise() /= q.array();
      upstream.middleCols(d * nb, nb) =
          (probs.array() * (kcols.array() - 1.0)).colwise() * (-scaled_w.array());
    }
  }
  if (grads) *grads = net_.backward(tape, upstream);
  return loss;
}

double DiscretizedPolicy::weighted_nll(const Mat& states, const Mat& actions,
                                       const Vec& weights) const {
  return weighted_nll_impl(states, actions, weights, nullptr);
}

nn::ParamSet DiscretizedPolicy::weighted_nll_gradient(const Mat& states,
                                                      const Mat& actions,
                                                      const Vec& weights) const {
  nn::ParamSet grads;
  weighted_nll_impl(states, actions, weights, &grads);
  return grads;
}

double DiscretizedPolicy::weighted_nll_step(const Mat& states, const Mat& actions,
                                            const Vec& weights) {
  nn::ParamSet grads;
  const double loss = weighted_nll_impl(states, actions, weights, &grads);
  if (!std::isfinite(loss)) throw NumericError("policy loss is not finite");
  nn::adam_update(net_, grads, adam_);
  return loss;
}

Vec awr_weights(const Vec& advantages, const AwrConfig& config) {
  if (!(config.lambda > 0.0) || !(config.weight_clip > 0.0)) {
    throw std::invalid_argument("AWR lambda and weight_clip must be positive");
  }
  Vec w(advantages.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(advantages[i])) throw NumericError("AWR advantage is not finite");
    w[i] = std::min(std::exp(advantages[i] / config.lambda), config.weight_clip);
  }
  return w;
}

double bc_step(DiscretizedPolicy& policy, const Mat& states, const Mat& actions) {
  return policy.weighted_nll_step(states, actions, Vec::Ones(states.rows()));
}

Mat stack_actions(const TransitionBatch& batch) {
  if (batch.empty()) return Mat();
  if (!batch.front()->a) throw std::invalid_argument("transition has no action");
  Mat out(static_cast<Eigen::Index>(batch.size()), batch.front()->a->size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch[i]->a) throw std::invalid_argument("transition has no action");
    out.row(static_cast<Eigen::Index>(i)) = batch[i]->a->transpose();
  }
  return out;
}

AwrStepResult awr_step(DiscretizedPolicy& policy, const ValueFunction& vf,
                       const RewardFn& reward_fn, const TransitionBatch& batch,
                       const AwrConfig& config) {
  const Vec weights = awr_weights(vf.advantages(batch, reward_fn(batch)), config);
  AwrStepResult res;
  res.mean_weight = weights.mean();
  res.loss = policy.weighted_nll_step(stack_states(batch, false), stack_actions(batch),
                                      weights);
  return res;
}

}  // namespace vfo
