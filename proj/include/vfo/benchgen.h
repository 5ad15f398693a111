#ifndef VFO_BENCHGEN_H_
#define VFO_BENCHGEN_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vfo/algorithms.h"
#include "vfo/data.h"
#include "vfo/env.h"

namespace vfo {

// Dataset metadata stores the env overrides as "env.<key>" entries.
Dataset make_dataset(std::vector<Trajectory> trajectories, Origin origin,
                     const std::string& env_name, const ConfigMap& env_config);
ConfigMap env_config_of(const Dataset& dataset);
std::unique_ptr<Env> make_env_for(const Dataset& dataset);

struct ExpertData {
  Dataset labeled;   // actions and rewards, origin B (for training level policies)
  Dataset stripped;  // states only, origin E
};

ExpertData generate_expert_data(const std::string& env_name, const ConfigMap& env_config,
                                int n_demos, std::uint64_t seed, int workers = 1);

struct SiBenchSpec {
  std::string env_name = "gridworld";
  ConfigMap env_config;
  std::vector<int> ladder = {1, 2, 5, 10, 20, 50};  // demonstrations per level
  int episodes_per_level = 200;
  int expert_pool = 50;
  RunConfig bc;  // level policies; steps default to 10000
  std::uint64_t seed = 0;
  int workers = 1;

  SiBenchSpec();
  void validate() const;
};

struct LevelStats {
  int level = 0;
  int demos = 0;  // d, or 0 for bimodal levels
  double fraction = 0.0;  // expert fraction, bimodal only
  int episodes = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double success_rate = 0.0;
  double min_return = 0.0;
  double max_return = 0.0;
};

std::string level_stats_csv(const LevelStats& stats);
LevelStats parse_level_stats_csv(const std::string& text);
LevelStats compute_level_stats(const Dataset& background, const Env& env, int level);

struct BenchLevel {
  int level = 0;
  int demos = 0;
  double fraction = 0.0;
  Dataset background;  // with rewards (oracle variant)
  LevelStats stats;
  std::optional<TrainedAgent> policy;  // SIBench only
};

// Level k: BC on the first ladder[k] demos of `expert_labeled` with seed
// spec.seed + k, then episodes_per_level rollouts of its stochastic policy.
std::vector<BenchLevel> generate_sibench(const SiBenchSpec& spec, const Dataset& expert_labeled);

struct BimodalSpec {
  std::string env_name = "gridworld";
  ConfigMap env_config;
  int total_trajectories = 200;
  std::vector<double> fractions = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

// ceil(f * N) expert trajectories followed by uniform-random ones.
std::vector<BenchLevel> generate_bimodal(const BimodalSpec& spec);

struct ReturnHistogram {
  double low = 0.0;
  double high = 0.0;
  std::vector<double> edges;  // bins + 1
  std::vector<int> counts;
};

// Fixed-width bins over [min, max] of the trajectory returns; a degenerate
// range puts everything in the first bin.
ReturnHistogram return_histogram(const Dataset& dataset, int bins = 20);
std::string histogram_csv(const ReturnHistogram& hist);
std::string histogram_svg(const ReturnHistogram& hist, const std::string& title);

// Writes <out>/<env>/expert/{demos.jsonl, demos_stripped.jsonl}.
void write_expert_data(const std::filesystem::path& out, const std::string& env_name,
                       const ExpertData& data);
// Writes <out>/<env>/<kind>/level_<k>/{background.jsonl, background_oracle.jsonl,
// stats.csv, return_hist.csv, return_hist.svg} plus policy/ for SIBench.
void write_levels(const std::filesystem::path& out, const std::string& env_name,
                  const std::string& kind, const std::vector<BenchLevel>& levels);

}  // namespace vfo

#endif  // VFO_BENCHGEN_H_
