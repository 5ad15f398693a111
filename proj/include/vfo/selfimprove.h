#ifndef VFO_SELFIMPROVE_H_
#define VFO_SELFIMPROVE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vfo/algorithms.h"
#include "vfo/data.h"

namespace vfo {

struct LoopSpec {
  RunConfig train;  // algorithm, env and hyperparameters
  int iterations = 10;
  int episodes_per_iteration = 200;
  int eval_episodes = 200;
  // Append new rollouts instead of replacing the background data.
  bool accumulate = false;
  // Score the iteration on the rollouts that become the next dataset.
  bool reuse_rollouts_for_eval = false;
  std::vector<std::uint64_t> seeds = {0};
  int workers = 1;
  // When set, each iteration's agent is saved under
  // <checkpoint_dir>/seed_<s>/iter_<i>.
  std::filesystem::path checkpoint_dir;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  std::uint64_t seed = 0;
  double mean_return = 0.0;
  double std_return = 0.0;  // over evaluation episodes
  double success_rate = 0.0;
  double background_mean_return = 0.0;  // data the agent was trained on
  int background_episodes = 0;
  std::string checkpoint;  // relative to LoopSpec::checkpoint_dir
};

struct LoopResult {
  std::vector<IterationRecord> records;
  bool aborted = false;
  std::string error;
};

using RecordCallback = std::function<void(const IterationRecord&)>;

// Per iteration: train on (expert, current background), roll out the
// trained stochastic policy, evaluate, then replace (or extend) the
// background data with the rollouts. `seed_background` must carry rewards
// so its mean return can be logged; rewards are removed before training
// unless the algorithm is the reward oracle. A numeric failure stops the
// loop with the records collected so far.
LoopResult run_loop(const LoopSpec& spec, const Dataset* expert, const Dataset& seed_background,
                    const RecordCallback& on_record = {});

std::string loop_log_csv(const std::vector<IterationRecord>& records);

// Lowest SIBench level (level_<k>/stats.csv under `sibench_dir`) whose
// success rate reaches `floor`; returns its background_oracle.jsonl path.
std::filesystem::path seed_selector(const std::filesystem::path& sibench_dir,
                                    double floor = 0.02);

}  // namespace vfo

#endif  // VFO_SELFIMPROVE_H_
