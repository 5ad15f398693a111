#ifndef VFO_EVAL_H_
#define VFO_EVAL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "vfo/algorithms.h"
#include "vfo/env.h"

namespace vfo {

// One evaluated episode; the long-format row of results.csv.
struct EpisodeRow {
  std::string env;
  std::string algo;
  std::string level_tag;
  long long seed = 0;
  long long episode = 0;
  double ret = 0.0;
  bool success = false;

  bool operator==(const EpisodeRow& other) const = default;
};

struct EvalResult {
  double mean_return = 0.0;
  double std_return = 0.0;  // sample std of the per-seed mean returns
  double success_rate = 0.0;
  double success_std = 0.0;
  int n_episodes = 0;  // total over all seeds
  int n_seeds = 0;
  double background_mean_return = 0.0;
  bool has_background = false;
  // Set when n_seeds == 1: the spread is reported as 0.
  bool single_seed_warning = false;
  std::vector<double> seed_mean_returns;
  std::vector<double> seed_success_rates;
};

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(const std::vector<double>& values);

// Runs n_episodes of `policy`; row seed is `seed_tag`, rollouts use
// `rollout_seed`.
std::vector<EpisodeRow> evaluate_episodes(const Env& env, const PolicyFn& policy,
                                          int n_episodes, std::uint64_t rollout_seed,
                                          long long seed_tag, int workers = 1);

// Groups rows by seed, averages each seed, then aggregates over seeds.
EvalResult summarize(const std::vector<EpisodeRow>& rows);

// n_seeds independent evaluation seeds of the agent's stochastic policy.
EvalResult evaluate(const TrainedAgent& agent, const Env& env, int n_episodes, int n_seeds,
                    std::uint64_t seed, int workers = 1,
                    std::vector<EpisodeRow>* rows = nullptr);

struct ImprovementPoint {
  std::string level_tag;
  double background_return = 0.0;  // x
  double difference = 0.0;         // y = policy mean - background mean
  double error = 0.0;              // std over seeds
};

struct LevelResult {
  std::string level_tag;
  EvalResult policy;
  double background_mean_return = 0.0;
};

// One point per level, sorted by background return (ties by tag).
std::vector<ImprovementPoint> improvement_curve(const std::vector<LevelResult>& levels);

}  // namespace vfo

#endif  // VFO_EVAL_H_
