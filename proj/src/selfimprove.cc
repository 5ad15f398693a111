#include "vfo/selfimprove.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "vfo/benchgen.h"
#include "vfo/checkpoint.h"
#include "vfo/eval.h"

namespace vfo {

void LoopSpec::validate() const {
  train.validate();
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (episodes_per_iteration < 1) throw std::invalid_argument("episodes_per_iteration must be >= 1");
  if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("no loop seeds");
}

namespace {

Dataset training_view(const Dataset& data, Algorithm algo) {
  if (algo == Algorithm::kAwrOracle) return data;
  Dataset out = data;
  for (auto& t : out.trajectories) t.rewards.reset();
  return out;
}

}  // namespace

LoopResult run_loop(const LoopSpec& spec, const Dataset* expert, const Dataset& seed_background,
                    const RecordCallback& on_record) {
  spec.validate();
  if (!seed_background.has_rewards()) {
    throw std::invalid_argument("seed background data needs rewards for logging");
  }
  if (uses_expert_data(spec.train.algorithm) && expert == nullptr) {
    throw std::invalid_argument(algorithm_name(spec.train.algorithm) + " needs expert data");
  }
  const auto env = spec.train.make_env();
  LoopResult result;
  for (const std::uint64_t seed : spec.seeds) {
    Dataset background = seed_background;
    for (int it = 1; it <= spec.iterations; ++it) {
      Rng seeds = derive_rng(seed, static_cast<std::uint64_t>(it));
      RunConfig cfg = spec.train;
      cfg.seed = seeds();
      const std::uint64_t collect_seed = seeds();
      const std::uint64_t eval_seed = seeds();

      IterationRecord rec;
      rec.iteration = it;
      rec.seed = seed;
      rec.background_mean_return = background.mean_return();
      rec.background_episodes = static_cast<int>(background.trajectories.size());

      std::optional<TrainedAgent> agent;
      try {
        agent = train(cfg, expert, training_view(background, cfg.algorithm));
      } catch (const NumericError& e) {
        result.aborted = true;
        result.error = "seed " + std::to_string(seed) + " iteration " + std::to_string(it) +
                       ": " + e.what();
        return result;
      }
      if (!spec.checkpoint_dir.empty()) {
        const auto rel = std::filesystem::path("seed_" + std::to_string(seed)) /
                         ("iter_" + std::to_string(it));
        agent->save(spec.checkpoint_dir / rel);
        rec.checkpoint = rel.string();
      }

      const PolicyFn policy = agent->stochastic_policy();
      std::vector<Trajectory> fresh =
          rollout(*env, policy, spec.episodes_per_iteration, collect_seed, spec.workers);
      std::vector<EpisodeRow> rows;
      if (spec.reuse_rollouts_for_eval) {
        for (std::size_t i = 0; i < fresh.size(); ++i) {
          rows.push_back({env->name(), "", "", 0, static_cast<long long>(i),
                          fresh[i].total_return(), trajectory_success(*env, fresh[i])});
        }
      } else {
        rows = evaluate_episodes(*env, policy, spec.eval_episodes, eval_seed, 0, spec.workers);
      }
      const EvalResult ev = summarize(rows);
      std::vector<double> returns;
      for (const auto& r : rows) returns.push_back(r.ret);
      rec.mean_return = ev.mean_return;
      rec.std_return = sample_std(returns);
      rec.success_rate = ev.success_rate;
      result.records.push_back(rec);
      if (on_record) on_record(rec);

      Dataset next = make_dataset(std::move(fresh), Origin::kBackground, cfg.env_name,
                                  cfg.env_config);
      if (spec.accumulate) {
        background.trajectories.insert(background.trajectories.end(),
                                       std::make_move_iterator(next.trajectories.begin()),
                                       std::make_move_iterator(next.trajectories.end()));
      } else {
        background = std::move(next);
      }
    }
  }
  return result;
}

std::string loop_log_csv(const std::vector<IterationRecord>& records) {
  std::string out =
      "seed,iteration,mean_return,std_return,success_rate,background_mean_return,"
      "background_episodes,checkpoint\n";
  for (const auto& r : records) {
    out += std::to_string(r.seed) + "," + std::to_string(r.iteration) + "," +
           format_double(r.mean_return) + "," + format_double(r.std_return) + "," +
           format_double(r.success_rate) + "," + format_double(r.background_mean_return) + "," +
           std::to_string(r.background_episodes) + "," + r.checkpoint + "\n";
  }
  return out;
}

std::filesystem::path seed_selector(const std::filesystem::path& sibench_dir, double floor) {
  std::map<int, std::filesystem::path> levels;
  if (!std::filesystem::is_directory(sibench_dir)) {
    throw std::invalid_argument("not a benchmark directory: " + sibench_dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(sibench_dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.rfind("level_", 0) != 0) continue;
    try {
      levels[std::stoi(name.substr(6))] = entry.path();
    } catch (const std::exception&) {
    }
  }
  for (const auto& [k, dir] : levels) {
    std::ifstream in(dir / "stats.csv", std::ios::binary);
    if (!in) throw std::runtime_error("missing " + (dir / "stats.csv").string());
    std::stringstream buf;
    buf << in.rdbuf();
    if (parse_level_stats_csv(buf.str()).success_rate >= floor) {
      return dir / "background_oracle.jsonl";
    }
  }
  throw std::runtime_error("no level in " + sibench_dir.string() + " reaches success rate " +
                           format_double(floor));
}

}  // namespace vfo
