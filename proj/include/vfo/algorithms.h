#ifndef VFO_ALGORITHMS_H_
#define VFO_ALGORITHMS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vfo/checkpoint.h"
#include "vfo/config.h"
#include "vfo/data.h"
#include "vfo/env.h"
#include "vfo/policy.h"
#include "vfo/reward.h"
#include "vfo/value.h"

namespace vfo {

enum class Algorithm { kVfoBin, kVfoDisc, kBc, kBco, kAwrOracle };

std::string algorithm_name(Algorithm algo);  // "vfo-bin", "vfo-disc", ...
Algorithm parse_algorithm(const std::string& name);
// Algorithms that learn from action-free expert data.
bool uses_expert_data(Algorithm algo);

struct RunConfig {
  Algorithm algorithm = Algorithm::kVfoBin;
  std::string env_name = "gridworld";
  // Env overrides, stored as "env.<key>" entries (e.g. env.width=5).
  ConfigMap env_config;
  long long steps = 20000;
  double learning_rate = 3e-4;
  std::size_t batch_size = 256;
  double gamma = 0.99;
  double alpha = 0.5;
  double lambda = 1.0;
  long long target_period = 200;
  double weight_decay = 0.0;
  std::vector<int> hidden = {64, 64};
  int num_bins = 101;
  double kernel_bandwidth = 2.0;
  double weight_clip = 20.0;
  long long disc_steps = 5000;
  long long idm_steps = 5000;
  bool normalize = true;
  double normalizer_clip = 10.0;
  // Extra AWR step on expert transitions with their true actions. Breaks the
  // observation-only setting; needs action-labeled expert data.
  bool privileged_expert_actions = false;
  long long log_every = 100;
  std::uint64_t seed = 0;

  // Keys match the field names ("algo" and "env" for the first two).
  static RunConfig from(const ConfigMap& map);
  ConfigMap to_map() const;
  void validate() const;

  nn::AdamConfig adam() const;
  ValueConfig value_config() const;
  PolicyConfig policy_config() const;
  AwrConfig awr_config() const;
  DiscriminatorConfig discriminator_config() const;
  std::unique_ptr<Env> make_env() const;
};

struct TrainLogRow {
  long long step = 0;
  double value_loss = 0.0;
  double policy_loss = 0.0;
  double mean_weight = 0.0;
};

struct TrainedAgent {
  RunConfig config;
  Normalizer normalizer;
  std::shared_ptr<DiscretizedPolicy> policy;
  std::shared_ptr<ValueFunction> value;                // VfO and AWR oracle
  std::shared_ptr<const Discriminator> discriminator;  // VfO-disc
  std::shared_ptr<DiscretizedPolicy> inverse_dynamics;  // BCO
  std::vector<TrainLogRow> log;
  long long value_updates = 0;
  long long policy_updates = 0;

  // Samples from the stochastic policy.
  PolicyFn stochastic_policy() const;
  PolicyFn greedy_policy() const;

  Checkpoint to_checkpoint() const;
  static TrainedAgent from_checkpoint(const Checkpoint& ckpt, const RunConfig& config);

  // <dir>/checkpoint.txt, <dir>/config.txt and <dir>/train_log.csv.
  void save(const std::filesystem::path& dir) const;
  static TrainedAgent load(const std::filesystem::path& dir);
};

std::string train_log_csv(const std::vector<TrainLogRow>& log);

enum class VfoVariant { kBinary, kDiscriminator };

// Value from observations: per step one AWR update on a background batch and
// one TD update on an (1 - alpha) D_E + alpha D_B batch, both computed with
// the value function of the previous step. `labeled_expert` is only read
// when config.privileged_expert_actions is set.
TrainedAgent train_vfo(const Dataset& expert, const Dataset& background,
                       const RunConfig& config, VfoVariant variant,
                       const Dataset* labeled_expert = nullptr);

TrainedAgent train_bc(const Dataset& background, const RunConfig& config);

// Inverse-dynamics labeling of D_E, then BC on half background, half
// labeled-expert batches.
TrainedAgent train_bco(const Dataset& expert, const Dataset& background,
                       const RunConfig& config);
// Accuracy of the inverse-dynamics model's mode action, judged by `same`.
double inverse_dynamics_accuracy(
    const DiscretizedPolicy& idm, const std::vector<Transition>& data,
    const std::function<bool(const Transition&, const Vec&)>& same);

// AWR with stored environment rewards on D_B only.
TrainedAgent train_awr_oracle(const Dataset& background, const RunConfig& config);

// Dispatches on config.algorithm. `expert` may be null for bc/awr-oracle.
TrainedAgent train(const RunConfig& config, const Dataset* expert,
                   const Dataset& background, const Dataset* labeled_expert = nullptr);

}  // namespace vfo

#endif  // VFO_ALGORITHMS_H_
