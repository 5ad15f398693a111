#include "vfo/env.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace vfo {

double Trajectory::total_return() const {
  if (!rewards) throw std::logic_error("trajectory has no rewards");
  double sum = 0.0;
  for (double r : *rewards) sum += r;
  return sum;
}

void Trajectory::validate() const {
  if (states.empty()) throw std::invalid_argument("trajectory has no states");
  if (actions && actions->size() + 1 != states.size()) {
    throw std::invalid_argument("trajectory needs one action per transition");
  }
  if (rewards && rewards->size() + 1 != states.size()) {
    throw std::invalid_argument("trajectory needs one reward per transition");
  }
  if (terminated && truncated) {
    throw std::invalid_argument("trajectory cannot be terminated and truncated");
  }
  const auto dim = states.front().size();
  for (const auto& s : states) {
    if (s.size() != dim) throw std::invalid_argument("ragged trajectory states");
  }
}

Vec Env::clip_action(const Vec& action) const {
  if (action.size() != spec_.action_dim) {
    throw ShapeError("action has wrong dimension for " + name());
  }
  if (!action.allFinite()) throw std::invalid_argument("non-finite action");
  return action.cwiseMax(spec_.action_low).cwiseMin(spec_.action_high);
}

Vec reset(const Env& env, std::uint64_t seed) {
  Rng rng(seed);
  return env.reset(rng);
}

Trajectory run_episode(const Env& env, const PolicyFn& policy, Rng& rng) {
  Trajectory traj;
  traj.actions.emplace();
  traj.rewards.emplace();
  traj.states.push_back(env.reset(rng));
  const int limit = env.spec().max_episode_length;
  for (int t = 0; t < limit; ++t) {
    Vec action = policy(traj.states.back(), rng);
    StepResult res = env.step(traj.states.back(), action, rng);
    traj.actions->push_back(std::move(action));
    traj.rewards->push_back(res.reward);
    traj.states.push_back(std::move(res.next_state));
    if (res.terminated) {
      traj.terminated = true;
      return traj;
    }
  }
  traj.truncated = true;
  return traj;
}

std::vector<Trajectory> rollout(const Env& env, const PolicyFn& policy,
                                int n_episodes, std::uint64_t seed,
                                int workers) {
  if (n_episodes < 1) throw std::invalid_argument("rollout needs n_episodes >= 1");
  std::vector<Trajectory> out(static_cast<std::size_t>(n_episodes));
  auto run_range = [&](const Env& worker_env, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      Rng rng = derive_rng(seed, static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] = run_episode(worker_env, policy, rng);
    }
  };
  workers = std::clamp(workers, 1, n_episodes);
  if (workers == 1) {
    run_range(env, 0, n_episodes);
    return out;
  }
  std::vector<std::unique_ptr<Env>> clones;
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    clones.push_back(env.clone());
    const int begin = n_episodes * w / workers;
    const int end = n_episodes * (w + 1) / workers;
    threads.emplace_back(run_range, std::cref(*clones.back()), begin, end);
  }
  for (auto& t : threads) t.join();
  return out;
}

PolicyFn uniform_random_policy(const EnvSpec& spec) {
  return [low = spec.action_low, high = spec.action_high](const Vec&, Rng& rng) {
    Vec a(low.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = uniform(rng, low[i], high[i]);
    return a;
  };
}

bool trajectory_success(const Env& env, const Trajectory& traj) {
  return std::any_of(traj.states.begin(), traj.states.end(),
                     [&](const Vec& s) { return env.is_success(s); });
}

std::unique_ptr<Env> make_env(const std::string& name, const ConfigMap& config) {
  if (name == "gridworld") {
    return std::make_unique<GridWorld>(GridWorld::config_from(config));
  }
  if (name == "pointmass") {
    return std::make_unique<PointMass>(PointMass::config_from(config));
  }
  throw ConfigError("unknown environment '" + name + "'");
}

// GridWorld

GridWorld::Config GridWorld::config_from(const ConfigMap& map) {
  Config c;
  c.width = static_cast<int>(map.get_int("width", c.width));
  c.height = static_cast<int>(map.get_int("height", c.height));
  c.goal_x = static_cast<int>(map.get_int("goal_x", c.goal_x));
  c.goal_y = static_cast<int>(map.get_int("goal_y", c.goal_y));
  c.slip = map.get_double("slip", c.slip);
  c.random_start = map.get_bool("random_start", c.random_start);
  c.start_x = static_cast<int>(map.get_int("start_x", c.start_x));
  c.start_y = static_cast<int>(map.get_int("start_y", c.start_y));
  c.max_steps = static_cast<int>(map.get_int("max_steps", c.max_steps));
  c.absorbing_goal = map.get_bool("absorbing_goal", c.absorbing_goal);
  return c;
}

GridWorld::GridWorld(Config config) : config_(config) {
  if (config_.width < 1 || config_.height < 1 || config_.width * config_.height < 2) {
    throw ConfigError("gridworld needs at least two cells");
  }
  if (config_.goal_x < 0) config_.goal_x = config_.width - 1;
  if (config_.goal_y < 0) config_.goal_y = config_.height - 1;
  if (config_.goal_x >= config_.width || config_.goal_y >= config_.height) {
    throw ConfigError("gridworld goal outside the grid");
  }
  if (!(config_.slip >= 0.0 && config_.slip < 1.0)) {
    throw ConfigError("gridworld slip must lie in [0, 1)");
  }
  if (!config_.random_start &&
      (config_.start_x < 0 || config_.start_x >= config_.width ||
       config_.start_y < 0 || config_.start_y >= config_.height ||
       cell(config_.start_x, config_.start_y) == goal_cell())) {
    throw ConfigError("gridworld start must be a non-goal cell");
  }
  if (config_.max_steps <= 0) config_.max_steps = 2 * (config_.width + config_.height);

  spec_.state_dim = num_cells();
  spec_.action_dim = 1;
  spec_.action_low = Vec::Constant(1, -1.0);
  spec_.action_high = Vec::Constant(1, 1.0);
  spec_.max_episode_length = config_.max_steps;
  spec_.discrete = true;

  expert_moves_.resize(static_cast<std::size_t>(num_cells()));
  const auto dist = distances_to_goal();
  for (int c = 0; c < num_cells(); ++c) {
    int best = kUp;
    for (int m = 0; m < kNumMoves; ++m) {
      if (dist[neighbor(c, m)] < dist[neighbor(c, best)]) best = m;
    }
    expert_moves_[static_cast<std::size_t>(c)] = best;
  }
}

Vec GridWorld::encode(int c) const {
  if (c < 0 || c >= num_cells()) throw std::out_of_range("gridworld cell out of range");
  Vec s = Vec::Zero(num_cells());
  s[c] = 1.0;
  return s;
}

int GridWorld::decode(const Vec& state) const {
  if (state.size() != num_cells()) throw ShapeError("gridworld state has wrong size");
  int hot = -1;
  for (int i = 0; i < num_cells(); ++i) {
    if (state[i] == 1.0) {
      if (hot >= 0) throw std::invalid_argument("gridworld state is not one-hot");
      hot = i;
    } else if (state[i] != 0.0) {
      throw std::invalid_argument("gridworld state is not one-hot");
    }
  }
  if (hot < 0) throw std::invalid_argument("gridworld state is not one-hot");
  return hot;
}

int GridWorld::move_from_action(double action) {
  const double a = std::clamp(action, -1.0, 1.0);
  return std::min(kNumMoves - 1, static_cast<int>(std::floor((a + 1.0) * 2.0)));
}

double GridWorld::action_for_move(int move) { return -0.75 + 0.5 * move; }

int GridWorld::neighbor(int c, int move) const {
  auto [x, y] = coords(c);
  switch (move) {
    case kUp: y = std::max(0, y - 1); break;
    case kDown: y = std::min(config_.height - 1, y + 1); break;
    case kLeft: x = std::max(0, x - 1); break;
    case kRight: x = std::min(config_.width - 1, x + 1); break;
    default: throw std::invalid_argument("bad gridworld move");
  }
  return cell(x, y);
}

std::vector<std::pair<int, double>> GridWorld::transition_probabilities(
    int c, int move) const {
  if (c == goal_cell()) return {{c, 1.0}};
  std::vector<std::pair<int, double>> out;
  for (int m = 0; m < kNumMoves; ++m) {
    const double p = m == move ? 1.0 - config_.slip : config_.slip / 3.0;
    if (p == 0.0) continue;
    const int next = neighbor(c, m);
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& e) { return e.first == next; });
    if (it == out.end()) {
      out.emplace_back(next, p);
    } else {
      it->second += p;
    }
  }
  return out;
}

std::vector<int> GridWorld::distances_to_goal() const {
  const int n = num_cells();
  const int inf = std::numeric_limits<int>::max() / 2;
  std::vector<int> dist(static_cast<std::size_t>(n), inf);
  dist[goal_cell()] = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (int c = 0; c < n; ++c) {
      if (c == goal_cell()) continue;
      for (int m = 0; m < kNumMoves; ++m) {
        const int cand = dist[neighbor(c, m)] + 1;
        if (cand < dist[c]) {
          dist[c] = cand;
          changed = true;
        }
      }
    }
  }
  return dist;
}

int GridWorld::expert_move(int c) const {
  return expert_moves_.at(static_cast<std::size_t>(c));
}

Vec GridWorld::reset(Rng& rng) const {
  if (!config_.random_start) return encode(cell(config_.start_x, config_.start_y));
  int c = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(num_cells() - 1)));
  if (c >= goal_cell()) ++c;
  return encode(c);
}

StepResult GridWorld::step(const Vec& state, const Vec& action, Rng& rng) const {
  const int c = decode(state);
  const int intended = move_from_action(clip_action(action)[0]);
  int move = intended;
  if (config_.slip > 0.0 && uniform01(rng) < config_.slip) {
    move = static_cast<int>(uniform_index(rng, kNumMoves - 1));
    if (move >= intended) ++move;
  }
  const int next = c == goal_cell() ? c : neighbor(c, move);
  StepResult res;
  res.next_state = encode(next);
  const bool entered = c != goal_cell() && next == goal_cell();
  res.terminated = entered && !config_.absorbing_goal;
  res.reward = entered ? 1.0 : 0.0;
  return res;
}

bool GridWorld::is_success(const Vec& state) const {
  return decode(state) == goal_cell();
}

PolicyFn GridWorld::expert_policy() const {
  return [world = *this](const Vec& state, Rng&) {
    return Vec::Constant(1, action_for_move(world.expert_move(world.decode(state))));
  };
}

std::unique_ptr<Env> GridWorld::clone() const {
  return std::make_unique<GridWorld>(*this);
}

// PointMass

PointMass::Config PointMass::config_from(const ConfigMap& map) {
  Config c;
  c.dt = map.get_double("dt", c.dt);
  c.goal_x = map.get_double("goal_x", c.goal_x);
  c.goal_y = map.get_double("goal_y", c.goal_y);
  c.max_speed = map.get_double("max_speed", c.max_speed);
  c.success_radius = map.get_double("success_radius", c.success_radius);
  c.max_steps = static_cast<int>(map.get_int("max_steps", c.max_steps));
  c.kp = map.get_double("kp", c.kp);
  c.kd = map.get_double("kd", c.kd);
  return c;
}

PointMass::PointMass(Config config) : config_(config) {
  if (!(config_.dt > 0) || !(config_.max_speed > 0) ||
      !(config_.success_radius > 0) || config_.max_steps < 1) {
    throw ConfigError("invalid pointmass configuration");
  }
  if (std::abs(config_.goal_x) > 1.0 || std::abs(config_.goal_y) > 1.0) {
    throw ConfigError("pointmass goal outside the box");
  }
  spec_.state_dim = 4;
  spec_.action_dim = 2;
  spec_.action_low = Vec::Constant(2, -1.0);
  spec_.action_high = Vec::Constant(2, 1.0);
  spec_.max_episode_length = config_.max_steps;
  spec_.discrete = false;
}

Vec PointMass::reset(Rng& rng) const {
  Vec s = Vec::Zero(4);
  s[0] = uniform(rng, -1.0, 1.0);
  s[1] = uniform(rng, -1.0, 1.0);
  return s;
}

StepResult PointMass::step(const Vec& state, const Vec& action, Rng&) const {
  if (state.size() != 4) throw ShapeError("pointmass state has wrong size");
  const Vec a = clip_action(action);
  Vec next(4);
  for (int i = 0; i < 2; ++i) {
    const double v = std::clamp(state[2 + i] + config_.dt * a[i],
                                -config_.max_speed, config_.max_speed);
    next[i] = std::clamp(state[i] + config_.dt * v, -1.0, 1.0);
    // Hitting the wall stops motion along that axis.
    next[2 + i] = (next[i] == -1.0 && v < 0) || (next[i] == 1.0 && v > 0) ? 0.0 : v;
  }
  StepResult res;
  res.reward = -distance_to_goal(next);
  res.next_state = std::move(next);
  return res;
}

double PointMass::distance_to_goal(const Vec& state) const {
  return std::hypot(state[0] - config_.goal_x, state[1] - config_.goal_y);
}

bool PointMass::is_success(const Vec& state) const {
  return distance_to_goal(state) <= config_.success_radius;
}

PolicyFn PointMass::expert_policy() const {
  return [cfg = config_](const Vec& s, Rng&) {
    Vec a(2);
    a[0] = cfg.kp * (cfg.goal_x - s[0]) - cfg.kd * s[2];
    a[1] = cfg.kp * (cfg.goal_y - s[1]) - cfg.kd * s[3];
    return Vec(a.cwiseMax(-1.0).cwiseMin(1.0));
  };
}

std::unique_ptr<Env> PointMass::clone() const {
  return std::make_unique<PointMass>(*this);
}

}  // namespace vfo
