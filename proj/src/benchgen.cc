#include "vfo/benchgen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vfo/checkpoint.h"
#include "vfo/eval.h"

namespace vfo {

Dataset make_dataset(std::vector<Trajectory> trajectories, Origin origin,
                     const std::string& env_name, const ConfigMap& env_config) {
  Dataset ds;
  ds.trajectories = std::move(trajectories);
  ds.origin = origin;
  ds.env_name = env_name;
  for (const auto& [k, v] : env_config.values()) ds.metadata["env." + k] = v;
  return ds;
}

ConfigMap env_config_of(const Dataset& dataset) {
  ConfigMap all;
  for (const auto& [k, v] : dataset.metadata) all.set(k, v);
  return all.with_prefix("env");
}

std::unique_ptr<Env> make_env_for(const Dataset& dataset) {
  return make_env(dataset.env_name, env_config_of(dataset));
}

ExpertData generate_expert_data(const std::string& env_name, const ConfigMap& env_config,
                                int n_demos, std::uint64_t seed, int workers) {
  if (n_demos < 1) throw std::invalid_argument("n_demos must be >= 1");
  const auto env = make_env(env_name, env_config);
  ExpertData out;
  out.labeled = make_dataset(rollout(*env, env->expert_policy(), n_demos, seed, workers),
                             Origin::kBackground, env_name, env_config);
  out.labeled.metadata["source"] = "expert";
  out.stripped = strip_actions(out.labeled);
  return out;
}

SiBenchSpec::SiBenchSpec() {
  bc.algorithm = Algorithm::kBc;
  bc.steps = 10000;
}

void SiBenchSpec::validate() const {
  if (ladder.empty()) throw std::invalid_argument("empty SIBench ladder");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i] < 1) throw std::invalid_argument("ladder entries must be >= 1");
    if (i > 0 && ladder[i] <= ladder[i - 1]) {
      throw std::invalid_argument("ladder must be strictly increasing");
    }
  }
  if (ladder.back() > expert_pool) {
    throw std::invalid_argument("ladder exceeds the expert pool size");
  }
  if (episodes_per_level < 1) throw std::invalid_argument("episodes_per_level must be >= 1");
  bc.validate();
}

std::string level_stats_csv(const LevelStats& s) {
  std::string out =
      "level,demos,fraction,episodes,mean_return,std_return,success_rate,min_return,"
      "max_return\n";
  out += std::to_string(s.level) + "," + std::to_string(s.demos) + "," +
         format_double(s.fraction) + "," + std::to_string(s.episodes) + "," +
         format_double(s.mean_return) + "," + format_double(s.std_return) + "," +
         format_double(s.success_rate) + "," + format_double(s.min_return) + "," +
         format_double(s.max_return) + "\n";
  return out;
}

LevelStats parse_level_stats_csv(const std::string& text) {
  std::istringstream in(text);
  std::string header, line;
  if (!std::getline(in, header) || !std::getline(in, line)) {
    throw std::invalid_argument("stats.csv needs a header and one row");
  }
  std::vector<std::string> f;
  std::stringstream ls(line);
  std::string cell;
  while (std::getline(ls, cell, ',')) f.push_back(cell);
  if (f.size() != 9) throw std::invalid_argument("stats.csv row has wrong field count");
  LevelStats s;
  try {
    s.level = std::stoi(f[0]);
    s.demos = std::stoi(f[1]);
    s.fraction = std::stod(f[2]);
    s.episodes = std::stoi(f[3]);
    s.mean_return = std::stod(f[4]);
    s.std_return = std::stod(f[5]);
    s.success_rate = std::stod(f[6]);
    s.min_return = std::stod(f[7]);
    s.max_return = std::stod(f[8]);
  } catch (const std::exception&) {
    throw std::invalid_argument("stats.csv has a malformed number");
  }
  return s;
}

LevelStats compute_level_stats(const Dataset& background, const Env& env, int level) {
  if (background.trajectories.empty()) throw std::invalid_argument("empty level dataset");
  LevelStats s;
  s.level = level;
  s.episodes = static_cast<int>(background.trajectories.size());
  std::vector<double> returns;
  double successes = 0.0;
  for (const auto& t : background.trajectories) {
    returns.push_back(t.total_return());
    if (trajectory_success(env, t)) successes += 1.0;
  }
  double sum = 0.0;
  for (double r : returns) sum += r;
  s.mean_return = sum / s.episodes;
  s.std_return = sample_std(returns);
  s.success_rate = successes / s.episodes;
  s.min_return = *std::min_element(returns.begin(), returns.end());
  s.max_return = *std::max_element(returns.begin(), returns.end());
  return s;
}

std::vector<BenchLevel> generate_sibench(const SiBenchSpec& spec, const Dataset& expert_labeled) {
  spec.validate();
  if (!expert_labeled.has_actions()) {
    throw std::invalid_argument("SIBench needs action-labeled expert demonstrations");
  }
  if (static_cast<int>(expert_labeled.trajectories.size()) < spec.ladder.back()) {
    throw std::invalid_argument("expert pool holds fewer demos than the ladder needs");
  }
  const auto env = make_env(spec.env_name, spec.env_config);
  std::vector<BenchLevel> levels;
  for (std::size_t k = 0; k < spec.ladder.size(); ++k) {
    const int d = spec.ladder[k];
    Dataset demos = expert_labeled;
    demos.trajectories.resize(static_cast<std::size_t>(d));

    RunConfig cfg = spec.bc;
    cfg.algorithm = Algorithm::kBc;
    cfg.env_name = spec.env_name;
    cfg.env_config = spec.env_config;
    cfg.seed = spec.seed + k;
    BenchLevel level;
    level.level = static_cast<int>(k);
    level.demos = d;
    level.policy = train_bc(demos, cfg);

    Rng rollout_seed = derive_rng(cfg.seed, 1);
    level.background =
        make_dataset(rollout(*env, level.policy->stochastic_policy(), spec.episodes_per_level,
                             rollout_seed(), spec.workers),
                     Origin::kBackground, spec.env_name, spec.env_config);
    level.background.metadata["kind"] = "sibench";
    level.background.metadata["demos"] = std::to_string(d);
    level.stats = compute_level_stats(level.background, *env, level.level);
    level.stats.demos = d;
    levels.push_back(std::move(level));
  }
  return levels;
}

void BimodalSpec::validate() const {
  if (total_trajectories < 1) throw std::invalid_argument("total_trajectories must be >= 1");
  if (fractions.empty()) throw std::invalid_argument("no bimodal fractions");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] >= 0.0 && fractions[i] <= 1.0)) {
      throw std::invalid_argument("bimodal fractions must lie in [0, 1]");
    }
    if (i > 0 && fractions[i] < fractions[i - 1]) {
      throw std::invalid_argument("bimodal fractions must be non-decreasing");
    }
  }
}

std::vector<BenchLevel> generate_bimodal(const BimodalSpec& spec) {
  spec.validate();
  const auto env = make_env(spec.env_name, spec.env_config);
  std::vector<BenchLevel> levels;
  for (std::size_t k = 0; k < spec.fractions.size(); ++k) {
    const double f = spec.fractions[k];
    const int n_expert = static_cast<int>(
        std::ceil(f * spec.total_trajectories - 1e-9));
    const int n_random = spec.total_trajectories - n_expert;
    Rng seeds = derive_rng(spec.seed + k, 0);
    const std::uint64_t expert_seed = seeds();
    const std::uint64_t random_seed = seeds();
    std::vector<Trajectory> trajs;
    if (n_expert > 0) {
      trajs = rollout(*env, env->expert_policy(), n_expert, expert_seed, spec.workers);
    }
    if (n_random > 0) {
      auto rnd = rollout(*env, uniform_random_policy(env->spec()), n_random, random_seed,
                         spec.workers);
      trajs.insert(trajs.end(), std::make_move_iterator(rnd.begin()),
                   std::make_move_iterator(rnd.end()));
    }
    BenchLevel level;
    level.level = static_cast<int>(k);
    level.fraction = f;
    level.background =
        make_dataset(std::move(trajs), Origin::kBackground, spec.env_name, spec.env_config);
    level.background.metadata["kind"] = "bimodal";
    level.background.metadata["expert_trajectories"] = std::to_string(n_expert);
    level.stats = compute_level_stats(level.background, *env, level.level);
    level.stats.fraction = f;
    levels.push_back(std::move(level));
  }
  return levels;
}

ReturnHistogram return_histogram(const Dataset& dataset, int bins) {
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  if (dataset.trajectories.empty()) throw std::invalid_argument("empty dataset");
  if (!dataset.has_rewards()) throw std::invalid_argument("dataset has no rewards");
  std::vector<double> returns;
  for (const auto& t : dataset.trajectories) returns.push_back(t.total_return());
  ReturnHistogram h;
  h.low = *std::min_element(returns.begin(), returns.end());
  h.high = *std::max_element(returns.begin(), returns.end());
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (h.high - h.low) / bins;
  for (int i = 0; i <= bins; ++i) h.edges.push_back(h.low + width * i);
  h.edges.back() = h.high;
  for (double r : returns) {
    int b = 0;
    if (width > 0) b = std::min(bins - 1, static_cast<int>((r - h.low) / width));
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

std::string histogram_csv(const ReturnHistogram& hist) {
  std::string out = "bin_low,bin_high,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out += format_double(hist.edges[i]) + "," + format_double(hist.edges[i + 1]) + "," +
           std::to_string(hist.counts[i]) + "\n";
  }
  return out;
}

std::string histogram_svg(const ReturnHistogram& hist, const std::string& title) {
  const double width = 480, height = 300, left = 50, top = 30, pw = 400, ph = 220;
  int max_count = 1;
  for (int c : hist.counts) max_count = std::max(max_count, c);
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
                    "\" height=\"" + num(height) +
                    "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"18\" text-anchor=\"middle\">" + title +
         "</text>\n";
  const double bw = pw / static_cast<double>(hist.counts.size());
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double h = ph * hist.counts[i] / max_count;
    svg += "<rect x=\"" + num(left + bw * i) + "\" y=\"" + num(top + ph - h) + "\" width=\"" +
           num(bw * 0.9) + "\" height=\"" + num(h) + "\" fill=\"#4c72b0\"/>\n";
  }
  svg += "<text x=\"" + num(left) + "\" y=\"" + num(top + ph + 16) + "\">" + num(hist.low) +
         "</text>\n";
  svg += "<text x=\"" + num(left + pw) + "\" y=\"" + num(top + ph + 16) +
         "\" text-anchor=\"end\">" + num(hist.high) + "</text>\n";
  svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top + 10) + "\" text-anchor=\"end\">" +
         std::to_string(max_count) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

void write_expert_data(const std::filesystem::path& out, const std::string& env_name,
                       const ExpertData& data) {
  const auto dir = out / env_name / "expert";
  std::filesystem::create_directories(dir);
  write_dataset(dir / "demos.jsonl", data.labeled);
  write_dataset(dir / "demos_stripped.jsonl", data.stripped);
}

void write_levels(const std::filesystem::path& out, const std::string& env_name,
                  const std::string& kind, const std::vector<BenchLevel>& levels) {
  for (const auto& level : levels) {
    const auto dir = out / env_name / kind / ("level_" + std::to_string(level.level));
    std::filesystem::create_directories(dir);
    Dataset ifo = level.background;
    for (auto& t : ifo.trajectories) t.rewards.reset();
    write_dataset(dir / "background.jsonl", ifo);
    write_dataset(dir / "background_oracle.jsonl", level.background);
    write_text(dir / "stats.csv", level_stats_csv(level.stats));
    const auto hist = return_histogram(level.background);
    write_text(dir / "return_hist.csv", histogram_csv(hist));
    write_text(dir / "return_hist.svg",
               histogram_svg(hist, env_name + " " + kind + " level " + std::to_string(level.level)));
    if (level.policy) level.policy->save(dir / "policy");
  }
}

}  // namespace vfo
