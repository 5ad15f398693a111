#include "vfo/eval.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace vfo {

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<EpisodeRow> evaluate_episodes(const Env& env, const PolicyFn& policy,
                                          int n_episodes, std::uint64_t rollout_seed,
                                          long long seed_tag, int workers) {
  if (n_episodes < 1) throw std::invalid_argument("n_episodes must be >= 1");
  const auto trajs = rollout(env, policy, n_episodes, rollout_seed, workers);
  std::vector<EpisodeRow> rows;
  rows.reserve(trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    EpisodeRow row;
    row.env = env.name();
    row.seed = seed_tag;
    row.episode = static_cast<long long>(i);
    row.ret = trajs[i].total_return();
    row.success = trajectory_success(env, trajs[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

EvalResult summarize(const std::vector<EpisodeRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("no episodes to summarize");
  struct Acc {
    double ret = 0.0;
    double success = 0.0;
    int n = 0;
  };
  std::map<long long, Acc> by_seed;
  for (const auto& r : rows) {
    auto& acc = by_seed[r.seed];
    acc.ret += r.ret;
    acc.success += r.success ? 1.0 : 0.0;
    ++acc.n;
  }
  EvalResult res;
  for (const auto& [seed, acc] : by_seed) {
    res.seed_mean_returns.push_back(acc.ret / acc.n);
    res.seed_success_rates.push_back(acc.success / acc.n);
    res.n_episodes += acc.n;
  }
  res.n_seeds = static_cast<int>(by_seed.size());
  for (std::size_t i = 0; i < by_seed.size(); ++i) {
    res.mean_return += res.seed_mean_returns[i];
    res.success_rate += res.seed_success_rates[i];
  }
  res.mean_return /= res.n_seeds;
  res.success_rate /= res.n_seeds;
  res.std_return = sample_std(res.seed_mean_returns);
  res.success_std = sample_std(res.seed_success_rates);
  res.single_seed_warning = res.n_seeds == 1;
  return res;
}

EvalResult evaluate(const TrainedAgent& agent, const Env& env, int n_episodes, int n_seeds,
                    std::uint64_t seed, int workers, std::vector<EpisodeRow>* rows) {
  if (n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");
  if (env.spec().state_dim != agent.policy->normalizer().dim() ||
      env.spec().action_dim != agent.policy->action_dim()) {
    throw ShapeError("agent does not match the environment's dimensions");
  }
  std::vector<EpisodeRow> all;
  for (int s = 0; s < n_seeds; ++s) {
    Rng seed_rng = derive_rng(seed, static_cast<std::uint64_t>(s));
    auto part = evaluate_episodes(env, agent.stochastic_policy(), n_episodes, seed_rng(), s,
                                  workers);
    for (auto& r : part) r.algo = algorithm_name(agent.config.algorithm);
    all.insert(all.end(), part.begin(), part.end());
  }
  EvalResult res = summarize(all);
  if (rows != nullptr) *rows = std::move(all);
  return res;
}

std::vector<ImprovementPoint> improvement_curve(const std::vector<LevelResult>& levels) {
  std::vector<ImprovementPoint> points;
  std::map<std::string, int> seen;
  for (const auto& lv : levels) {
    if (seen[lv.level_tag]++ > 0) throw std::invalid_argument("duplicate level " + lv.level_tag);
    if (lv.policy.n_episodes < 1) {
      throw std::invalid_argument("level " + lv.level_tag + " has no evaluation");
    }
    points.push_back({lv.level_tag, lv.background_mean_return,
                      lv.policy.mean_return - lv.background_mean_return, lv.policy.std_return});
  }
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    if (a.background_return != b.background_return) {
      return a.background_return < b.background_return;
    }
    return a.level_tag < b.level_tag;
  });
  return points;
}

}  // namespace vfo
