// vfo: benchmark generation, training, evaluation, reporting and the
// self-improvement loop.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vfo/algorithms.h"
#include "vfo/benchgen.h"
#include "vfo/data.h"
#include "vfo/eval.h"
#include "vfo/report.h"
#include "vfo/selfimprove.h"

namespace fs = std::filesystem;
using namespace vfo;

namespace {

ConfigMap overrides(const std::string& config_path, const std::vector<std::string>& sets) {
  ConfigMap map;
  if (!config_path.empty()) map = ConfigMap::read(config_path);
  for (const auto& s : sets) map.set_entry(s);
  return map;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// Env name and overrides come from the dataset; the config may refine them.
RunConfig run_config_for(const Dataset& background, const ConfigMap& user) {
  ConfigMap map;
  map.set("env", background.env_name);
  const ConfigMap env_config = env_config_of(background);
  for (const auto& [k, v] : env_config.values()) map.set("env." + k, v);
  map.merge(user);
  return RunConfig::from(map);
}

struct GenBenchArgs {
  std::string env = "gridworld";
  std::string kind = "sibench";
  std::string out;
  std::uint64_t seed = 0;
  std::string config;
  std::vector<std::string> sets;
};

int run_gen_bench(const GenBenchArgs& a) {
  const ConfigMap user = overrides(a.config, a.sets);
  const ConfigMap env_config = user.with_prefix("env");
  const int workers = static_cast<int>(user.get_int("workers", 1));
  if (a.kind == "sibench") {
    SiBenchSpec spec;
    spec.env_name = a.env;
    spec.env_config = env_config;
    spec.ladder = user.get_int_list("ladder", spec.ladder);
    spec.episodes_per_level = static_cast<int>(user.get_int("episodes", spec.episodes_per_level));
    spec.expert_pool = static_cast<int>(user.get_int("pool", spec.ladder.back()));
    spec.seed = a.seed;
    spec.workers = workers;
    ConfigMap bc = user.with_prefix("bc");
    bc.set("algo", "bc");
    bc.set("env", a.env);
    for (const auto& [k, v] : env_config.values()) bc.set("env." + k, v);
    if (!bc.has("steps")) bc.set("steps", "10000");
    spec.bc = RunConfig::from(bc);
    spec.validate();
    const ExpertData expert =
        generate_expert_data(a.env, env_config, spec.expert_pool, a.seed, workers);
    write_expert_data(a.out, a.env, expert);
    const auto levels = generate_sibench(spec, expert.labeled);
    write_levels(a.out, a.env, "sibench", levels);
    for (const auto& lv : levels) {
      std::cout << "level_" << lv.level << " d=" << lv.demos
                << " mean_return=" << lv.stats.mean_return
                << " success=" << lv.stats.success_rate << "\n";
    }
  } else if (a.kind == "bimodal") {
    BimodalSpec spec;
    spec.env_name = a.env;
    spec.env_config = env_config;
    spec.total_trajectories = static_cast<int>(user.get_int("episodes", spec.total_trajectories));
    spec.fractions = user.get_double_list("fractions", spec.fractions);
    spec.seed = a.seed;
    spec.workers = workers;
    const int n_demos = static_cast<int>(user.get_int("pool", 50));
    write_expert_data(a.out, a.env,
                      generate_expert_data(a.env, env_config, n_demos, a.seed, workers));
    const auto levels = generate_bimodal(spec);
    write_levels(a.out, a.env, "bimodal", levels);
    for (const auto& lv : levels) {
      std::cout << "level_" << lv.level << " f=" << lv.fraction
                << " mean_return=" << lv.stats.mean_return
                << " success=" << lv.stats.success_rate << "\n";
    }
  } else {
    throw std::invalid_argument("unknown --kind " + a.kind);
  }
  return 0;
}

struct TrainArgs {
  std::string algo;
  std::string expert;
  std::string expert_labeled;
  std::string background;
  std::string config;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  std::string out;
  bool privileged = false;
};

int run_train(const TrainArgs& a) {
  const Dataset background = read_dataset(a.background);
  ConfigMap user = overrides(a.config, a.sets);
  user.set("algo", a.algo);
  user.set("seed", std::to_string(a.seed));
  if (a.privileged) user.set("privileged_expert_actions", "true");
  const RunConfig cfg = run_config_for(background, user);

  std::optional<Dataset> expert;
  if (!a.expert.empty()) expert = read_dataset(a.expert);
  std::optional<Dataset> labeled;
  if (!a.expert_labeled.empty()) labeled = read_dataset(a.expert_labeled);
  const TrainedAgent agent = train(cfg, expert ? &*expert : nullptr, background,
                                   labeled ? &*labeled : nullptr);
  agent.save(a.out);
  std::cout << "trained " << algorithm_name(cfg.algorithm) << " for " << cfg.steps
            << " steps -> " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string agent;
  std::string background;
  std::string level_tag = "level_0";
  int episodes = 200;
  int seeds = 5;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  const TrainedAgent agent = TrainedAgent::load(a.agent);
  const auto env = agent.config.make_env();
  std::vector<EpisodeRow> rows;
  const EvalResult res = evaluate(agent, *env, a.episodes, a.seeds, a.seed, a.workers, &rows);
  for (auto& r : rows) r.level_tag = a.level_tag;
  if (!a.background.empty()) {
    const auto bg = dataset_rows(read_dataset(a.background), *env, a.level_tag);
    rows.insert(rows.end(), bg.begin(), bg.end());
  }
  fs::create_directories(a.out);
  write_results(fs::path(a.out) / "results.csv", rows);
  std::cout << "mean_return=" << res.mean_return << " std=" << res.std_return
            << " success_rate=" << res.success_rate << " seeds=" << res.n_seeds << "\n";
  if (res.single_seed_warning) std::cerr << "warning: one seed, std reported as 0\n";
  return 0;
}

struct ReportArgs {
  std::vector<std::string> results;
  std::string out;
};

int run_report(const ReportArgs& a) {
  std::vector<EpisodeRow> rows;
  for (const auto& path : a.results) {
    const auto part = read_results(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const ReportOutcome outcome = emit_report(rows, a.out);
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& f : outcome.files) std::cout << f.string() << "\n";
  return outcome.ok ? 0 : 2;
}

struct SelfImproveArgs {
  std::string algo;
  std::string env = "gridworld";
  std::string expert;
  std::string seed_data;
  int iterations = 10;
  int episodes_per_iter = 200;
  int eval_episodes = 200;
  int seeds = 1;
  std::uint64_t seed = 0;
  bool accumulate = false;
  bool reuse_eval = false;
  bool save_checkpoints = false;
  int workers = 1;
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

int run_self_improve(const SelfImproveArgs& a) {
  const Dataset seed_data = read_dataset(a.seed_data);
  if (seed_data.env_name != a.env) {
    throw std::invalid_argument("seed data is from " + seed_data.env_name + ", not " + a.env);
  }
  ConfigMap user = overrides(a.config, a.sets);
  user.set("algo", a.algo);
  LoopSpec spec;
  spec.train = run_config_for(seed_data, user);
  spec.iterations = a.iterations;
  spec.episodes_per_iteration = a.episodes_per_iter;
  spec.eval_episodes = a.eval_episodes;
  spec.accumulate = a.accumulate;
  spec.reuse_rollouts_for_eval = a.reuse_eval;
  spec.workers = a.workers;
  spec.seeds.clear();
  for (int s = 0; s < a.seeds; ++s) spec.seeds.push_back(a.seed + static_cast<std::uint64_t>(s));
  fs::create_directories(a.out);
  if (a.save_checkpoints) spec.checkpoint_dir = fs::path(a.out) / "checkpoints";

  std::optional<Dataset> expert;
  if (!a.expert.empty()) expert = read_dataset(a.expert);
  const LoopResult result =
      run_loop(spec, expert ? &*expert : nullptr, seed_data, [](const IterationRecord& r) {
        std::cout << "seed " << r.seed << " iter " << r.iteration << " return " << r.mean_return
                  << " success " << r.success_rate << " (data " << r.background_mean_return
                  << ")\n";
      });
  write_text(fs::path(a.out) / "loop_log.csv", loop_log_csv(result.records));
  if (result.aborted) {
    std::cerr << "loop aborted: " << result.error << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value from observations: imitation from action-free demonstrations"};
  app.require_subcommand(1);

  GenBenchArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-bench", "Generate SIBench or bimodal background data");
  gen_cmd->add_option("--env", gen.env, "gridworld or pointmass");
  gen_cmd->add_option("--kind", gen.kind, "sibench or bimodal")
      ->check(CLI::IsMember({"sibench", "bimodal"}));
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Base seed");
  gen_cmd->add_option("--config", gen.config, "key=value file");
  gen_cmd->add_option("--set", gen.sets, "key=value override (repeatable)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train an agent");
  train_cmd->add_option("--algo", tr.algo, "vfo-bin, vfo-disc, bc, bco or awr-oracle")
      ->required()
      ->check(CLI::IsMember({"vfo-bin", "vfo-disc", "bc", "bco", "awr-oracle"}));
  train_cmd->add_option("--expert", tr.expert, "Action-free expert dataset");
  train_cmd->add_option("--expert-labeled", tr.expert_labeled,
                        "Action-labeled expert dataset (privileged mode only)");
  train_cmd->add_option("--background", tr.background, "Background dataset")->required();
  train_cmd->add_option("--config", tr.config, "key=value file");
  train_cmd->add_option("--set", tr.sets, "key=value override (repeatable)");
  train_cmd->add_option("--seed", tr.seed, "Seed");
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_flag("--privileged-expert-actions", tr.privileged,
                      "Also regress on true expert actions");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained agent");
  eval_cmd->add_option("--agent", ev.agent, "Agent directory")->required();
  eval_cmd->add_option("--background", ev.background,
                       "Background dataset with rewards, added as reference rows");
  eval_cmd->add_option("--level-tag", ev.level_tag, "Level tag for the results rows");
  eval_cmd->add_option("--episodes", ev.episodes, "Episodes per seed");
  eval_cmd->add_option("--seeds", ev.seeds, "Evaluation seeds");
  eval_cmd->add_option("--seed", ev.seed, "Base seed");
  eval_cmd->add_option("--workers", ev.workers, "Rollout threads");
  eval_cmd->add_option("--out", ev.out, "Output directory")->required();

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Render results.csv files into plots");
  report_cmd->add_option("--results", rep.results, "results.csv files")->required();
  report_cmd->add_option("--out", rep.out, "Output directory")->required();

  SelfImproveArgs si;
  auto* si_cmd = app.add_subcommand("self-improve", "Run the train/collect loop");
  si_cmd->add_option("--algo", si.algo, "Trainer")
      ->required()
      ->check(CLI::IsMember({"vfo-bin", "vfo-disc", "bc", "bco", "awr-oracle"}));
  si_cmd->add_option("--env", si.env, "Environment");
  si_cmd->add_option("--expert", si.expert, "Action-free expert dataset");
  si_cmd->add_option("--seed-data", si.seed_data, "Initial background dataset (with rewards)")
      ->required();
  si_cmd->add_option("--iterations", si.iterations, "Loop iterations");
  si_cmd->add_option("--episodes-per-iter", si.episodes_per_iter, "Rollouts per iteration");
  si_cmd->add_option("--eval-episodes", si.eval_episodes, "Evaluation episodes per iteration");
  si_cmd->add_option("--seeds", si.seeds, "Number of loop seeds");
  si_cmd->add_option("--seed", si.seed, "First loop seed");
  si_cmd->add_flag("--accumulate", si.accumulate, "Append rollouts instead of replacing");
  si_cmd->add_flag("--reuse-eval", si.reuse_eval, "Score iterations on the collected rollouts");
  si_cmd->add_flag("--save-checkpoints", si.save_checkpoints, "Save every iteration's agent");
  si_cmd->add_option("--workers", si.workers, "Rollout threads");
  si_cmd->add_option("--config", si.config, "key=value file");
  si_cmd->add_option("--set", si.sets, "key=value override (repeatable)");
  si_cmd->add_option("--out", si.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen_cmd) return run_gen_bench(gen);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(ev);
    if (*report_cmd) return run_report(rep);
    if (*si_cmd) return run_self_improve(si);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
