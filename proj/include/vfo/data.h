#ifndef VFO_DATA_H_
#define VFO_DATA_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfo/nn.h"
#include "vfo/rng.h"
#include "vfo/trajectory.h"

namespace vfo {

std::string origin_tag(Origin origin);  // "E" or "B"
Origin parse_origin(const std::string& tag);

struct Dataset {
  std::vector<Trajectory> trajectories;
  Origin origin = Origin::kBackground;
  std::string env_name;
  std::map<std::string, std::string> metadata;

  std::size_t num_transitions() const;
  std::size_t num_states() const;
  bool has_actions() const;
  bool has_rewards() const;
  // Mean undiscounted return; requires rewards.
  double mean_return() const;
  // Checks every trajectory plus the origin rules: expert data carries no
  // actions, background data always does.
  void validate() const;

  bool operator==(const Dataset& other) const;
};

struct Transition {
  Vec s;
  Vec s_next;
  std::optional<Vec> a;           // present iff origin is background
  Origin z = Origin::kBackground;
  bool is_terminal = false;             // s_next is absorbing
  bool is_truncation_boundary = false;  // time limit hit at s_next
  std::optional<double> env_reward;     // ground truth, oracle use only
};

using TransitionBatch = std::vector<const Transition*>;

// One transition per consecutive state pair. The last one is flagged
// terminal or truncation boundary according to the trajectory flags.
std::vector<Transition> transitions(const Dataset& dataset);

// All states of all trajectories, in order.
std::vector<Vec> all_states(const Dataset& dataset);

// Drops actions and rewards and marks the data as expert. States untouched.
Dataset strip_actions(const Dataset& dataset);

// Samples (s, s', z) ~ (1 - alpha) D_E + alpha D_B: origin first, then a
// uniform transition of that origin.
class MixtureSampler {
 public:
  MixtureSampler(const Dataset& expert, const Dataset& background,
                 double alpha, std::uint64_t seed);

  TransitionBatch sample_batch(std::size_t batch_size);
  double alpha() const { return alpha_; }
  const std::vector<Transition>& expert_transitions() const { return expert_; }
  const std::vector<Transition>& background_transitions() const { return background_; }

 private:
  std::vector<Transition> expert_;
  std::vector<Transition> background_;
  double alpha_;
  Rng rng_;
};

// Uniform sampling from a fixed transition list (with replacement).
class UniformSampler {
 public:
  UniformSampler(std::vector<Transition> pool, std::uint64_t seed);
  TransitionBatch sample_batch(std::size_t batch_size);
  const std::vector<Transition>& pool() const { return pool_; }

 private:
  std::vector<Transition> pool_;
  Rng rng_;
};

// Per-dimension standardization, frozen once fitted. Outputs are clipped to
// +-clip.
class Normalizer {
 public:
  static constexpr double kVarianceFloor = 1e-6;

  Normalizer() = default;
  Normalizer(Vec mean, Vec variance, std::size_t count, double clip);
  static Normalizer identity(int dim);
  static Normalizer fit(const std::vector<const Dataset*>& datasets,
                        double clip = 10.0);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vec& mean() const { return mean_; }
  const Vec& variance() const { return variance_; }
  std::size_t count() const { return count_; }
  double clip() const { return clip_; }

  Vec apply(const Vec& state) const;
  // Normalizes each row.
  Mat apply(const Mat& states) const;

 private:
  Vec mean_;
  Vec variance_;
  Vec inv_std_;
  std::size_t count_ = 0;
  double clip_ = 10.0;
};

// Stacks states (or next states) of a batch into rows.
Mat stack_states(const TransitionBatch& batch, bool next);
Mat stack_rows(const std::vector<Vec>& rows);

// One JSON object per line. Line 1 is the header
//   {"env_name":..., "format":"vfo-dataset", "metadata":{...},
//    "origin":"E"|"B", "version":1}
// followed by one trajectory per line:
//   {"actions":[[...]], "rewards":[...], "states":[[...]],
//    "terminated":bool, "truncated":bool}
// with absent actions/rewards omitted. Paths ending in ".gz" are gzip
// compressed.
std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(const std::string& text);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace vfo

#endif  // VFO_DATA_H_
