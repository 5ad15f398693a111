// Acceptance suite: one PASS/FAIL line per criterion.
//
//   vfo_acceptance [--workdir DIR] [--only AC4,AC6]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vfo/algorithms.h"
#include "vfo/benchgen.h"
#include "vfo/eval.h"
#include "vfo/selfimprove.h"

namespace fs = std::filesystem;

namespace vfo {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << x;
  return s.str();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

Vec onehot(int i, int n) {
  Vec v = Vec::Zero(n);
  v[i] = 1.0;
  return v;
}

// 9x9 grid, goal in the center, short horizon. Entering the goal pays 1
// and the agent then stays there until the time limit.
const ConfigMap kBenchEnv{{"width", "9"},  {"height", "9"},    {"goal_x", "4"},
                          {"goal_y", "4"}, {"slip", "0.1"},    {"max_steps", "12"},
                          {"absorbing_goal", "true"}};

constexpr int kSeeds = 5;
constexpr int kEvalEpisodes = 500;

RunConfig bench_config(Algorithm algo, std::uint64_t seed) {
  RunConfig c;
  c.algorithm = algo;
  c.env_config = kBenchEnv;
  c.steps = 5000;
  c.hidden = {32, 32};
  c.seed = seed;
  if (algo == Algorithm::kAwrOracle) c.lambda = 0.01;
  return c;
}

// Shared SIBench ladder, generated once and written to disk.
struct Bench {
  ExpertData expert;
  std::vector<BenchLevel> levels;
  fs::path dir;
};

Bench& bench(const fs::path& workdir) {
  static std::optional<Bench> cache;
  if (cache) return *cache;
  SiBenchSpec spec;
  spec.env_config = kBenchEnv;
  spec.ladder = {1, 2, 3, 5, 7, 10};
  spec.episodes_per_level = 200;
  spec.expert_pool = 50;
  spec.bc.env_config = kBenchEnv;
  spec.bc.steps = 10000;
  spec.bc.hidden = {32, 32};
  spec.seed = 1;
  Bench b{generate_expert_data("gridworld", kBenchEnv, spec.expert_pool, spec.seed), {}, {}};
  b.levels = generate_sibench(spec, b.expert.labeled);
  b.dir = workdir / "bench";
  write_expert_data(b.dir, "gridworld", b.expert);
  write_levels(b.dir, "gridworld", "sibench", b.levels);
  cache = std::move(b);
  return *cache;
}

double expert_return(const fs::path&) {
  const auto env = make_env("gridworld", kBenchEnv);
  return summarize(evaluate_episodes(*env, env->expert_policy(), 4000, 99, 0)).mean_return;
}

Dataset without_rewards(Dataset d) {
  for (auto& t : d.trajectories) t.rewards.reset();
  return d;
}

// Per-seed mean returns of `algo` trained on `background`.
std::vector<double> seed_returns(Algorithm algo, const Dataset* expert, const Dataset& background) {
  const auto env = make_env("gridworld", kBenchEnv);
  const Dataset view = algo == Algorithm::kAwrOracle ? background : without_rewards(background);
  std::vector<double> out;
  for (int s = 0; s < kSeeds; ++s) {
    const TrainedAgent agent = train(bench_config(algo, s), expert, view);
    out.push_back(evaluate(agent, *env, kEvalEpisodes, 1, 1000 + s).mean_return);
  }
  return out;
}

// ---------------------------------------------------------------------------

double fd_error(nn::DenseNet net, const Vec& analytic,
                const std::function<double(const nn::DenseNet&)>& loss) {
  return nn::relative_error(analytic, nn::numerical_gradient(net, loss));
}

Outcome ac1_gradients(const fs::path&) {
  std::map<std::string, double> err;
  std::size_t max_params = 0;
  Rng rng(2024);

  {
    ValueConfig cfg;
    cfg.hidden = {6};
    ValueFunction vf(Normalizer::identity(3), cfg, rng);
    std::vector<Transition> pool(8);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      pool[i].s = Vec::Random(3);
      pool[i].s_next = Vec::Random(3);
      pool[i].is_terminal = i == 3;
    }
    TransitionBatch batch;
    for (const auto& t : pool) batch.push_back(&t);
    const Vec rewards = Vec::Random(8);
    const Vec targets = vf.td_targets(batch, rewards);
    const Mat states = stack_states(batch, false);
    err["td"] = fd_error(vf.net(), vf.td_loss_gradient(batch, rewards).flatten(),
                         [&](const nn::DenseNet& n) {
                           return (n.forward(states).col(0) - targets).squaredNorm() / 8.0;
                         });
    max_params = std::max(max_params, vf.net().num_parameters());
  }

  auto policy_loss = [&](const std::string& name, int state_dim, int action_dim, const Vec& w) {
    PolicyConfig pc;
    pc.num_bins = 5;
    pc.hidden = {3};
    pc.kernel_bandwidth = 1.0;
    const DiscretizedPolicy p(Normalizer::identity(state_dim), Vec::Constant(action_dim, -1.0),
                              Vec::Constant(action_dim, 1.0), pc, rng);
    const Mat states = Mat::Random(w.size(), state_dim);
    const Mat actions = Mat::Random(w.size(), action_dim);
    err[name] = fd_error(p.net(), p.weighted_nll_gradient(states, actions, w).flatten(),
                         [&](const nn::DenseNet& n) {
                           DiscretizedPolicy q = p;
                           q.set_net(n);
                           return q.weighted_nll(states, actions, w);
                         });
    max_params = std::max(max_params, p.net().num_parameters());
  };
  policy_loss("bc", 2, 2, Vec::Ones(6));
  policy_loss("awr", 2, 2, awr_weights(Vec::Random(6) * 2.0, AwrConfig{}));
  // Inverse dynamics: the same head on concatenated (s, s') inputs.
  policy_loss("inverse_dynamics", 4, 1, Vec::Ones(6));

  {
    const Discriminator d(Normalizer::identity(3), nn::DenseNet::glorot({3, 6, 1}, rng));
    const Mat e = Mat::Random(7, 3);
    const Mat b = Mat::Random(5, 3);
    err["discriminator"] = fd_error(d.net(), d.loss_gradient(e, b).flatten(),
                                    [&](const nn::DenseNet& n) {
                                      return Discriminator(Normalizer::identity(3), n).loss(e, b);
                                    });
    max_params = std::max(max_params, d.net().num_parameters());
  }

  bool pass = max_params <= 64;
  std::string detail;
  for (const auto& [name, e] : err) {
    pass = pass && e < 1e-5;
    detail += name + "=" + fmt(e * 1e9, 2) + "e-9 ";
  }
  return {pass, detail + "max_params=" + std::to_string(max_params)};
}

// ---------------------------------------------------------------------------

Outcome ac2_value_oracle(const fs::path&) {
  const ConfigMap env_cfg{{"width", "5"}, {"height", "5"}, {"slip", "0.1"},
                          {"absorbing_goal", "true"}};
  const GridWorld g(GridWorld::config_from(env_cfg));
  const int n = g.num_cells();
  const ExpertData expert = generate_expert_data("gridworld", env_cfg, 200, 5);
  const Dataset background =
      make_dataset(rollout(g, uniform_random_policy(g.spec()), 400, 6), Origin::kBackground,
                   "gridworld", env_cfg);

  RunConfig cfg;
  cfg.env_config = env_cfg;
  cfg.steps = 30000;
  cfg.hidden = {64, 64};
  cfg.learning_rate = 1e-3;
  cfg.target_period = 50;
  cfg.seed = 11;
  const double alpha = cfg.alpha, gamma = cfg.gamma;

  // Empirical mixture chain: origin E with weight (1 - alpha) / N_E per
  // expert transition, B with alpha / N_B per background transition.
  const auto te = transitions(expert.stripped);
  const auto tb = transitions(background);
  std::vector<std::vector<std::pair<int, bool>>> out(n);  // (next cell, expert) per transition
  std::vector<std::vector<double>> weight(n);
  Mat P = Mat::Zero(n, n);
  Vec r = Vec::Zero(n), w = Vec::Zero(n);
  auto add = [&](const std::vector<Transition>& ts, bool is_expert) {
    const double wt = (is_expert ? 1.0 - alpha : alpha) / static_cast<double>(ts.size());
    for (const auto& t : ts) {
      const int s = g.decode(t.s), sn = g.decode(t.s_next);
      out[s].push_back({sn, is_expert});
      weight[s].push_back(wt);
      P(s, sn) += wt;
      w[s] += wt;
      if (is_expert) r[s] += wt;
    }
  };
  add(te, true);
  add(tb, false);
  int covered = 0;
  for (int s = 0; s < n; ++s) {
    if (w[s] > 0.0) {
      ++covered;
      P.row(s) /= w[s];
      r[s] /= w[s];
    }
  }
  if (covered != n) return {false, "datasets cover " + std::to_string(covered) + " cells"};
  const Vec v_dp = (Mat::Identity(n, n) - gamma * P).partialPivLu().solve(r);

  // Monte-Carlo estimate of the cumulative discounted expert likelihood.
  const int rollouts = 1000, horizon = 1100;
  std::vector<std::discrete_distribution<std::size_t>> pick;
  for (int s = 0; s < n; ++s) pick.emplace_back(weight[s].begin(), weight[s].end());
  Rng rng(123);
  Vec mc(n), se(n);
  for (int s0 = 0; s0 < n; ++s0) {
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < rollouts; ++k) {
      int s = s0;
      double ret = 0.0, disc = 1.0;
      for (int t = 0; t < horizon; ++t) {
        const auto [next, is_expert] = out[s][pick[s](rng)];
        ret += disc * (is_expert ? 1.0 : 0.0);
        disc *= gamma;
        s = next;
      }
      sum += ret;
      sq += ret * ret;
    }
    mc[s0] = sum / rollouts;
    se[s0] = std::sqrt(std::max(0.0, sq / rollouts - mc[s0] * mc[s0]) / (rollouts - 1));
  }

  const TrainedAgent agent = train(cfg, &expert.stripped, without_rewards(background));
  Vec v_net(n);
  for (int s = 0; s < n; ++s) v_net[s] = agent.value->value(g.encode(s));

  const double range = 1.0 / (1.0 - gamma);
  const double dp_err = (v_net - v_dp).cwiseAbs().maxCoeff();
  const double mc_z = ((v_dp - mc).cwiseAbs().array() / se.array()).maxCoeff();
  const double net_mc_z = ((v_net - mc).cwiseAbs().array() / se.array()).maxCoeff();
  const bool pass = dp_err <= 0.05 * range && mc_z <= 3.0;
  return {pass, "max|v-v_dp|=" + fmt(dp_err) + " (limit " + fmt(0.05 * range, 1) +
                    ") max|v_dp-mc|/se=" + fmt(mc_z, 2) + " max|v-mc|/se=" + fmt(net_mc_z, 2) +
                    " v range [" + fmt(v_dp.minCoeff(), 1) + "," + fmt(v_dp.maxCoeff(), 1) + "]"};
}

// ---------------------------------------------------------------------------

Outcome ac3_discriminator(const fs::path&) {
  auto counted = [](int a, int b, Origin origin) {
    Dataset d;
    d.origin = origin;
    for (int i = 0; i < a + b; ++i) {
      Trajectory t;
      t.states.push_back(onehot(i < a ? 0 : 1, 2));
      if (origin == Origin::kBackground) {
        t.actions.emplace();
        t.rewards.emplace();
      }
      t.truncated = true;
      d.trajectories.push_back(t);
    }
    return d;
  };
  DiscriminatorConfig cfg;
  cfg.steps = 4000;
  cfg.hidden = {8};
  cfg.adam.learning_rate = 3e-3;
  const Discriminator d = train_discriminator(counted(9, 1, Origin::kExpert),
                                              counted(1, 9, Origin::kBackground),
                                              Normalizer::identity(2), cfg, 1);
  const double pa = d.probability(onehot(0, 2)), pb = d.probability(onehot(1, 2));
  return {pa >= 0.87 && pa <= 0.93 && pb >= 0.07 && pb <= 0.13,
          "d(A)=" + fmt(pa, 4) + " d(B)=" + fmt(pb, 4)};
}

// ---------------------------------------------------------------------------

Outcome ac4_sibench(const fs::path& workdir) {
  Bench& b = bench(workdir);
  int vfo_ok = 0, awr_ok = 0;
  std::string detail;
  for (const auto& level : b.levels) {
    const double bg = level.stats.mean_return;
    const auto vfo = seed_returns(Algorithm::kVfoBin, &b.expert.stripped, level.background);
    const auto awr = seed_returns(Algorithm::kAwrOracle, nullptr, level.background);
    const double dv = mean_of(vfo) - bg, da = mean_of(awr) - bg;
    const double sv = sample_std(vfo), sa = sample_std(awr);
    vfo_ok += dv > 2.0 * sv;
    awr_ok += da > 2.0 * sa;
    std::cout << "  AC4 level_" << level.level << " d=" << level.demos << " bg=" << fmt(bg)
              << " vfo-bin=" << fmt(dv) << "+-" << fmt(sv) << " awr-oracle=" << fmt(da) << "+-"
              << fmt(sa) << std::endl;
  }
  detail = "vfo-bin positive on " + std::to_string(vfo_ok) + "/6 (need 4), awr-oracle on " +
           std::to_string(awr_ok) + "/6 (need 5)";
  return {vfo_ok >= 4 && awr_ok >= 5, detail};
}

// ---------------------------------------------------------------------------

Outcome ac5_bimodal(const fs::path&) {
  BimodalSpec spec;
  spec.env_config = kBenchEnv;
  spec.total_trajectories = 200;
  spec.fractions = {0.2};
  spec.seed = 1;
  const BenchLevel level = generate_bimodal(spec)[0];
  const double bg = level.stats.mean_return;
  const auto bc = seed_returns(Algorithm::kBc, nullptr, level.background);
  const double d = mean_of(bc) - bg, s = sample_std(bc);
  return {d >= -s, "bg=" + fmt(bg) + " bc improvement=" + fmt(d) + "+-" + fmt(s)};
}

// ---------------------------------------------------------------------------

Outcome ac6_self_improvement(const fs::path& workdir) {
  Bench& b = bench(workdir);
  const fs::path seed_path = seed_selector(b.dir / "gridworld" / "sibench");
  const Dataset seed_data = read_dataset(seed_path);
  const double seed_return = seed_data.mean_return();
  const double expert = expert_return(workdir);

  auto loop = [&](Algorithm algo) {
    LoopSpec spec;
    spec.train = bench_config(algo, 0);
    spec.iterations = 10;
    spec.episodes_per_iteration = 1000;
    spec.reuse_rollouts_for_eval = true;
    spec.seeds = {0, 1, 2, 3, 4};
    const LoopResult res = run_loop(
        spec, algo == Algorithm::kBc ? nullptr : &b.expert.stripped, seed_data,
        [&](const IterationRecord& r) {
          std::cout << "  AC6 " << algorithm_name(algo) << " seed " << r.seed << " iter "
                    << r.iteration << " return " << fmt(r.mean_return) << std::endl;
        });
    if (res.aborted) throw std::runtime_error(res.error);
    return res.records;
  };

  const auto vfo = loop(Algorithm::kVfoBin);
  std::map<std::uint64_t, double> best;
  for (const auto& r : vfo) best[r.seed] = std::max(best[r.seed], r.mean_return);
  int reached = 0;
  for (const auto& [s, v] : best) reached += v >= 0.9 * expert;

  const auto bc = loop(Algorithm::kBc);
  std::map<int, std::vector<double>> by_iter;
  for (const auto& r : bc) by_iter[r.iteration].push_back(r.mean_return);
  double bc_max = 0.0;
  for (const auto& [it, v] : by_iter) {
    if (it >= 2) bc_max = std::max(bc_max, mean_of(v));
  }

  const bool pass = reached * 2 > kSeeds && bc_max <= 1.1 * seed_return;
  return {pass, "seed " + seed_path.parent_path().filename().string() + " return " +
                    fmt(seed_return) + ", expert " + fmt(expert) + "; vfo-bin reached " +
                    fmt(0.9 * expert) + " on " + std::to_string(reached) +
                    "/5 seeds; bc max seed-mean after iteration 1 " + fmt(bc_max) + " (limit " +
                    fmt(1.1 * seed_return) + ")"};
}

// ---------------------------------------------------------------------------

Outcome ac7_degeneracy(const fs::path&) {
  const auto env = make_env("gridworld", kBenchEnv);
  const PolicyFn expert = env->expert_policy();
  const PolicyFn random = uniform_random_policy(env->spec());
  const PolicyFn noisy = [&](const Vec& s, Rng& rng) {
    return uniform01(rng) < 0.6 ? expert(s, rng) : random(s, rng);
  };
  const Dataset data = make_dataset(rollout(*env, noisy, 300, 3), Origin::kBackground,
                                    "gridworld", kBenchEnv);
  const Normalizer norm = Normalizer::fit({&data}, 10.0);
  const int dim = env->spec().state_dim;
  PolicyConfig pc;
  pc.hidden = {32, 32};
  Rng init(4);
  const DiscretizedPolicy start(norm, env->spec().action_low, env->spec().action_high, pc, init);
  ValueConfig vc;
  vc.hidden = {32};
  Rng vinit(5);
  const ValueFunction random_v(norm, vc, vinit);
  nn::DenseNet zero_net({dim, 1});
  zero_net.set_params(zero_net.zeros_like());
  const ValueFunction zero_v(norm, vc, zero_net);
  const RewardFn reward = binary_reward_fn();

  auto run = [&](const ValueFunction* vf, double lambda, int steps) {
    DiscretizedPolicy p = start;
    UniformSampler sampler(transitions(data), 77);
    for (int i = 0; i < steps; ++i) {
      const TransitionBatch batch = sampler.sample_batch(256);
      if (vf) {
        awr_step(p, *vf, reward, batch, AwrConfig{lambda, 20.0});
      } else {
        bc_step(p, stack_states(batch, false), stack_actions(batch));
      }
    }
    return p;
  };

  const DiscretizedPolicy bc = run(nullptr, 0.0, 1500);
  const DiscretizedPolicy awr = run(&random_v, 1e6, 1500);
  int same = 0, total = 0;
  for (const auto& s : all_states(data)) {
    same += awr.mode_action(s) == bc.mode_action(s);
    ++total;
  }
  const double agreement = same / static_cast<double>(total);

  const DiscretizedPolicy bc_short = run(nullptr, 0.0, 200);
  const DiscretizedPolicy zero_adv = run(&zero_v, 1.0, 200);
  const bool identical = bc_short.net().flat_parameters() == zero_adv.net().flat_parameters();

  Transition terminal;
  terminal.s = Vec::Zero(dim);
  terminal.s_next = terminal.s;
  terminal.is_terminal = true;
  const double target = random_v.td_target(terminal, 1.0);
  const bool target_ok = target == 1.0 / (1.0 - 0.99) && std::abs(target - 100.0) < 1e-12;

  std::ostringstream t;
  t.precision(17);
  t << target;
  return {agreement >= 0.99 && identical && target_ok,
          "argmax agreement " + fmt(agreement, 4) + ", zero-advantage bit-identical " +
              (identical ? "yes" : "no") + ", terminal target " + t.str()};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(VFO_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  return std::system(cmd.c_str());
}

Outcome ac8_determinism(const fs::path& workdir) {
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* tag : {"run_a", "run_b"}) {
    const fs::path dir = workdir / "determinism" / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string env = " --set env.width=5 --set env.height=5";
    const std::vector<std::string> cmds = {
        "gen-bench --env gridworld --kind sibench --seed 3 --out " + (dir / "bench").string() +
            env + " --set ladder=1,4 --set episodes=50 --set pool=4 --set bc.steps=300"
                  " --set bc.hidden=16",
        "train --algo vfo-disc --expert " +
            (dir / "bench/gridworld/expert/demos_stripped.jsonl").string() + " --background " +
            (dir / "bench/gridworld/sibench/level_0/background.jsonl").string() +
            " --set steps=300 --set hidden=16 --set disc_steps=200 --seed 9 --out " +
            (dir / "agent").string(),
        "eval --agent " + (dir / "agent").string() + " --background " +
            (dir / "bench/gridworld/sibench/level_0/background_oracle.jsonl").string() +
            " --episodes 50 --seeds 2 --seed 4 --out " + (dir / "eval").string(),
        "self-improve --algo bco --env gridworld --expert " +
            (dir / "bench/gridworld/expert/demos_stripped.jsonl").string() + " --seed-data " +
            (dir / "bench/gridworld/sibench/level_0/background_oracle.jsonl").string() +
            " --iterations 2 --episodes-per-iter 40 --eval-episodes 40 --seeds 2"
            " --save-checkpoints" + env +
            " --set steps=200 --set hidden=16 --set idm_steps=200 --out " +
            (dir / "loop").string(),
    };
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      if (run_cli(cmds[i], dir / ("log_" + std::to_string(i) + ".txt")) != 0) {
        return {false, std::string(tag) + " command " + std::to_string(i) + " failed"};
      }
    }
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (!e.is_regular_file() || e.path().filename().string().rfind("log_", 0) == 0) continue;
      files[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    runs.push_back(std::move(files));
  }
  int checkpoints = 0, csvs = 0;
  std::vector<std::string> differ;
  for (const auto& [name, bytes] : runs[0]) {
    checkpoints += name.find("checkpoint.txt") != std::string::npos;
    csvs += name.size() > 4 && name.substr(name.size() - 4) == ".csv";
    auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) differ.push_back(name);
  }
  const bool pass = differ.empty() && runs[0].size() == runs[1].size() && checkpoints >= 3 &&
                    runs[0].count("eval/results.csv") == 1;
  std::string detail = std::to_string(runs[0].size()) + " files compared (" +
                       std::to_string(checkpoints) + " checkpoints, " + std::to_string(csvs) +
                       " csv), " + std::to_string(differ.size()) + " differ";
  if (!differ.empty()) detail += ", first: " + differ.front();
  return {pass, detail};
}

}  // namespace
}  // namespace vfo

int main(int argc, char** argv) {
  fs::path workdir = fs::temp_directory_path() / "vfo_acceptance";
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) only.insert(item);
    } else {
      std::cerr << "usage: vfo_acceptance [--workdir DIR] [--only AC1,AC2,...]\n";
      return 2;
    }
  }
  fs::create_directories(workdir);

  using Check = vfo::Outcome (*)(const fs::path&);
  const std::vector<std::tuple<std::string, std::string, Check, double>> checks = {
      {"AC1", "gradient oracle", vfo::ac1_gradients, 30.0},
      {"AC2", "value oracle", vfo::ac2_value_oracle, 120.0},
      {"AC3", "discriminator optimum", vfo::ac3_discriminator, 30.0},
      {"AC4", "SIBench improvement", vfo::ac4_sibench, 900.0},
      {"AC5", "bimodal BC", vfo::ac5_bimodal, 0.0},
      {"AC6", "self-improvement loop", vfo::ac6_self_improvement, 1200.0},
      {"AC7", "degeneracy checks", vfo::ac7_degeneracy, 0.0},
      {"AC8", "CLI determinism", vfo::ac8_determinism, 0.0},
  };

  int failures = 0;
  for (const auto& [id, name, check, budget] : checks) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    vfo::Outcome o;
    try {
      o = check(workdir);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget > 0.0 && secs > budget) {
      o.pass = false;
      o.detail += " (over the " + vfo::fmt(budget, 0) + " s budget)";
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << name << ": " << o.detail << " ["
              << vfo::fmt(secs, 1) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
