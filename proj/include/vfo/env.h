#ifndef VFO_ENV_H_
#define VFO_ENV_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vfo/config.h"
#include "vfo/nn.h"
#include "vfo/rng.h"
#include "vfo/trajectory.h"

namespace vfo {

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  Vec action_low;
  Vec action_high;
  int max_episode_length = 1;
  bool discrete = false;
};

// Environments only ever report termination; truncation is decided by the
// episode runner from EnvSpec::max_episode_length.
struct StepResult {
  Vec next_state;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

using PolicyFn = std::function<Vec(const Vec& state, Rng& rng)>;

// Stateless simulator: all episode state lives in the state vector, so step()
// depends only on (state, action, rng).
class Env {
 public:
  virtual ~Env() = default;

  virtual std::string name() const = 0;
  const EnvSpec& spec() const { return spec_; }

  virtual Vec reset(Rng& rng) const = 0;
  // Actions outside the bounds are clipped; non-finite actions throw.
  virtual StepResult step(const Vec& state, const Vec& action, Rng& rng) const = 0;
  virtual bool is_success(const Vec& state) const = 0;
  virtual PolicyFn expert_policy() const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;

 protected:
  Vec clip_action(const Vec& action) const;
  EnvSpec spec_;
};

Vec reset(const Env& env, std::uint64_t seed);

// Runs one episode until termination or the time limit. Actions and
// rewards are always recorded.
Trajectory run_episode(const Env& env, const PolicyFn& policy, Rng& rng);

// Episode i uses derive_rng(seed, i), so results do not depend on how
// episodes are split across workers. `workers` > 1 runs in threads; each
// worker uses its own clone of the environment.
std::vector<Trajectory> rollout(const Env& env, const PolicyFn& policy,
                                int n_episodes, std::uint64_t seed,
                                int workers = 1);

PolicyFn uniform_random_policy(const EnvSpec& spec);

// True iff any state of the trajectory satisfies the success predicate.
bool trajectory_success(const Env& env, const Trajectory& traj);

// "gridworld" or "pointmass"; `config` holds env-specific overrides.
std::unique_ptr<Env> make_env(const std::string& name,
                              const ConfigMap& config = {});

// Grid of width x height cells with 4 moves. States are one-hot cell
// encodings (index y * width + x). The single action dimension in [-1, 1] is
// split into four equal intervals: up, down, left, right.
class GridWorld : public Env {
 public:
  struct Config {
    int width = 7;
    int height = 7;
    int goal_x = -1;  // defaults to the last column
    int goal_y = -1;  // defaults to the last row
    double slip = 0.1;
    bool random_start = true;
    int start_x = 0;
    int start_y = 0;
    int max_steps = 0;  // 0 -> 2 * (width + height)
    // Keep the episode running at the goal (zero reward after entering it)
    // until the time limit instead of terminating.
    bool absorbing_goal = false;
  };
  enum Move { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
  static constexpr int kNumMoves = 4;

  explicit GridWorld(Config config);
  static Config config_from(const ConfigMap& map);

  std::string name() const override { return "gridworld"; }
  Vec reset(Rng& rng) const override;
  StepResult step(const Vec& state, const Vec& action, Rng& rng) const override;
  bool is_success(const Vec& state) const override;
  PolicyFn expert_policy() const override;
  std::unique_ptr<Env> clone() const override;

  const Config& config() const { return config_; }
  int num_cells() const { return config_.width * config_.height; }
  int goal_cell() const { return cell(config_.goal_x, config_.goal_y); }
  int cell(int x, int y) const { return y * config_.width + x; }
  std::pair<int, int> coords(int cell) const {
    return {cell % config_.width, cell / config_.width};
  }
  Vec encode(int cell) const;
  // Throws if the state is not a one-hot cell encoding.
  int decode(const Vec& state) const;

  static int move_from_action(double action);
  static double action_for_move(int move);
  // Deterministic successor of a move (walls block).
  int neighbor(int cell, int move) const;
  // Successor distribution of intending `move`: 1 - slip for the intended
  // move, slip / 3 for each other move.
  std::vector<std::pair<int, double>> transition_probabilities(int cell,
                                                               int move) const;
  // Shortest-path step counts to the goal from value iteration on the
  // slip-free grid.
  std::vector<int> distances_to_goal() const;
  // Greedy move on distances_to_goal(); ties go to the lowest move index.
  int expert_move(int cell) const;

 private:
  Config config_;
  std::vector<int> expert_moves_;
};

// 2-D point mass: state (px, py, vx, vy), action = acceleration in [-1, 1]^2.
// Semi-implicit Euler step; positions clipped to [-1, 1]^2 and speeds to
// max_speed. Reward is -||p' - goal||; success within success_radius.
class PointMass : public Env {
 public:
  struct Config {
    double dt = 0.1;
    double goal_x = 0.5;
    double goal_y = 0.5;
    double max_speed = 1.0;
    double success_radius = 0.1;
    int max_steps = 100;
    double kp = 3.0;  // expert gains
    double kd = 2.5;
  };

  explicit PointMass(Config config);
  static Config config_from(const ConfigMap& map);

  std::string name() const override { return "pointmass"; }
  Vec reset(Rng& rng) const override;
  StepResult step(const Vec& state, const Vec& action, Rng& rng) const override;
  bool is_success(const Vec& state) const override;
  PolicyFn expert_policy() const override;
  std::unique_ptr<Env> clone() const override;

  const Config& config() const { return config_; }
  double distance_to_goal(const Vec& state) const;

 private:
  Config config_;
};

}  // namespace vfo

#endif  // VFO_ENV_H_
