#include "vfo/algorithms.h"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace vfo {

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kVfoBin: return "vfo-bin";
    case Algorithm::kVfoDisc: return "vfo-disc";
    case Algorithm::kBc: return "bc";
    case Algorithm::kBco: return "bco";
    case Algorithm::kAwrOracle: return "awr-oracle";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kVfoBin, Algorithm::kVfoDisc, Algorithm::kBc,
                      Algorithm::kBco, Algorithm::kAwrOracle}) {
    if (algorithm_name(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

bool uses_expert_data(Algorithm algo) {
  return algo == Algorithm::kVfoBin || algo == Algorithm::kVfoDisc ||
         algo == Algorithm::kBco;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t component) {
  Rng rng = derive_rng(seed, component);
  return rng();
}

enum SeedComponent : std::uint64_t {
  kValueInit = 0,
  kPolicyInit,
  kMixtureSampler,
  kPolicySampler,
  kDiscriminator,
  kIdmInit,
  kIdmSampler,
  kExpertSampler,
};

Normalizer make_normalizer(const RunConfig& cfg, std::vector<const Dataset*> data) {
  if (!cfg.normalize) {
    const auto& first = data.front()->trajectories.front().states.front();
    return Normalizer::identity(static_cast<int>(first.size()));
  }
  return Normalizer::fit(data, cfg.normalizer_clip);
}

void check_background(const Dataset& background, const RunConfig& cfg) {
  background.validate();
  if (background.env_name != cfg.env_name) {
    throw std::invalid_argument("background data is from " + background.env_name +
                                ", config says " + cfg.env_name);
  }
  if (background.origin != Origin::kBackground || !background.has_actions()) {
    throw std::invalid_argument("background data must be action-labeled");
  }
  if (background.num_transitions() == 0) throw std::invalid_argument("background data is empty");
}

void check_expert(const Dataset& expert, const Dataset& background) {
  expert.validate();
  if (expert.origin != Origin::kExpert || expert.has_actions()) {
    throw std::invalid_argument("expert data must be action-free");
  }
  if (expert.env_name != background.env_name) {
    throw std::invalid_argument("expert and background data come from different envs");
  }
  if (expert.num_transitions() == 0) throw std::invalid_argument("expert data is empty");
}


bool should_log(const RunConfig& cfg, long long step) {
  return step % cfg.log_every == 0 || step == cfg.steps;
}

std::shared_ptr<DiscretizedPolicy> make_policy(const RunConfig& cfg, const Normalizer& norm) {
  const EnvSpec spec = cfg.make_env()->spec();
  if (spec.state_dim != norm.dim()) {
    throw std::invalid_argument("dataset state dim does not match env " + cfg.env_name);
  }
  Rng init(sub_seed(cfg.seed, kPolicyInit));
  return std::make_shared<DiscretizedPolicy>(norm, spec.action_low, spec.action_high,
                                             cfg.policy_config(), init);
}

}  // namespace

RunConfig RunConfig::from(const ConfigMap& map) {
  RunConfig c;
  c.algorithm = parse_algorithm(map.get_string("algo", algorithm_name(c.algorithm)));
  c.env_name = map.get_string("env", c.env_name);
  c.env_config = map.with_prefix("env");
  c.steps = map.get_int("steps", c.steps);
  c.learning_rate = map.get_double("learning_rate", c.learning_rate);
  c.batch_size = static_cast<std::size_t>(map.get_int("batch_size", static_cast<long long>(c.batch_size)));
  c.gamma = map.get_double("gamma", c.gamma);
  c.alpha = map.get_double("alpha", c.alpha);
  c.lambda = map.get_double("lambda", c.lambda);
  c.target_period = map.get_int("target_period", c.target_period);
  c.weight_decay = map.get_double("weight_decay", c.weight_decay);
  c.hidden = map.get_int_list("hidden", c.hidden);
  c.num_bins = static_cast<int>(map.get_int("num_bins", c.num_bins));
  c.kernel_bandwidth = map.get_double("kernel_bandwidth", c.kernel_bandwidth);
  c.weight_clip = map.get_double("weight_clip", c.weight_clip);
  c.disc_steps = map.get_int("disc_steps", c.disc_steps);
  c.idm_steps = map.get_int("idm_steps", c.idm_steps);
  c.normalize = map.get_bool("normalize", c.normalize);
  c.normalizer_clip = map.get_double("normalizer_clip", c.normalizer_clip);
  c.privileged_expert_actions =
      map.get_bool("privileged_expert_actions", c.privileged_expert_actions);
  c.log_every = map.get_int("log_every", c.log_every);
  c.seed = static_cast<std::uint64_t>(map.get_int("seed", static_cast<long long>(c.seed)));
  c.validate();
  return c;
}

ConfigMap RunConfig::to_map() const {
  ConfigMap m;
  m.set("algo", algorithm_name(algorithm));
  m.set("env", env_name);
  for (const auto& [k, v] : env_config.values()) m.set("env." + k, v);
  m.set("steps", std::to_string(steps));
  m.set("learning_rate", format_double(learning_rate));
  m.set("batch_size", std::to_string(batch_size));
  m.set("gamma", format_double(gamma));
  m.set("alpha", format_double(alpha));
  m.set("lambda", format_double(lambda));
  m.set("target_period", std::to_string(target_period));
  m.set("weight_decay", format_double(weight_decay));
  m.set("hidden", join_ints(hidden));
  m.set("num_bins", std::to_string(num_bins));
  m.set("kernel_bandwidth", format_double(kernel_bandwidth));
  m.set("weight_clip", format_double(weight_clip));
  m.set("disc_steps", std::to_string(disc_steps));
  m.set("idm_steps", std::to_string(idm_steps));
  m.set("normalize", normalize ? "true" : "false");
  m.set("normalizer_clip", format_double(normalizer_clip));
  m.set("privileged_expert_actions", privileged_expert_actions ? "true" : "false");
  m.set("log_every", std::to_string(log_every));
  m.set("seed", std::to_string(seed));
  return m;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
  if (steps < 1) fail("steps must be >= 1");
  if (!(learning_rate > 0)) fail("learning_rate must be > 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(gamma > 0 && gamma < 1)) fail("gamma must lie in (0, 1)");
  if (!(alpha > 0 && alpha < 1)) fail("alpha must lie strictly inside (0, 1)");
  if (!(lambda > 0)) fail("lambda must be > 0");
  if (target_period < 1) fail("target_period must be >= 1");
  if (weight_decay < 0) fail("weight_decay must be >= 0");
  for (int h : hidden) {
    if (h < 1) fail("hidden sizes must be positive");
  }
  if (num_bins < 2) fail("num_bins must be >= 2");
  if (kernel_bandwidth < 0) fail("kernel_bandwidth must be >= 0");
  if (!(weight_clip > 0)) fail("weight_clip must be > 0");
  if (disc_steps < 1 || idm_steps < 1) fail("disc_steps and idm_steps must be >= 1");
  if (!(normalizer_clip > 0)) fail("normalizer_clip must be > 0");
  if (log_every < 1) fail("log_every must be >= 1");
}

nn::AdamConfig RunConfig::adam() const {
  nn::AdamConfig a;
  a.learning_rate = learning_rate;
  a.weight_decay = weight_decay;
  return a;
}

ValueConfig RunConfig::value_config() const {
  return {gamma, target_period, hidden, adam()};
}

PolicyConfig RunConfig::policy_config() const {
  return {num_bins, kernel_bandwidth, hidden, adam()};
}

std::unique_ptr<Env> RunConfig::make_env() const {
  return vfo::make_env(env_name, env_config);
}

AwrConfig RunConfig::awr_config() const { return {lambda, weight_clip}; }

DiscriminatorConfig RunConfig::discriminator_config() const {
  DiscriminatorConfig d;
  d.steps = disc_steps;
  d.batch_size = batch_size;
  d.hidden = hidden;
  d.adam = adam();
  return d;
}

// TrainedAgent

PolicyFn TrainedAgent::stochastic_policy() const {
  return [p = policy](const Vec& s, Rng& rng) { return p->sample_action(s, rng); };
}

PolicyFn TrainedAgent::greedy_policy() const {
  return [p = policy](const Vec& s, Rng&) { return p->mode_action(s); };
}

Checkpoint TrainedAgent::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.put_vector("normalizer/mean", normalizer.mean());
  ckpt.put_vector("normalizer/variance", normalizer.variance());
  ckpt.put_scalar("normalizer/clip", normalizer.clip());
  ckpt.put_scalar("normalizer/count", static_cast<double>(normalizer.count()));
  ckpt.put_net("policy", policy->net());
  ckpt.put_vector("policy/action_low", policy->action_low());
  ckpt.put_vector("policy/action_high", policy->action_high());
  if (value) ckpt.put_net("value", value->net());
  if (discriminator) ckpt.put_net("disc", discriminator->net());
  if (inverse_dynamics) ckpt.put_net("idm", inverse_dynamics->net());
  return ckpt;
}

TrainedAgent TrainedAgent::from_checkpoint(const Checkpoint& ckpt, const RunConfig& config) {
  TrainedAgent agent;
  agent.config = config;
  agent.normalizer = Normalizer(ckpt.get_vector("normalizer/mean"),
                                ckpt.get_vector("normalizer/variance"),
                                static_cast<std::size_t>(ckpt.get_scalar("normalizer/count")),
                                ckpt.get_scalar("normalizer/clip"));
  agent.policy = std::make_shared<DiscretizedPolicy>(
      agent.normalizer, ckpt.get_vector("policy/action_low"),
      ckpt.get_vector("policy/action_high"), config.policy_config(), ckpt.get_net("policy"));
  if (ckpt.contains_net("value")) {
    agent.value = std::make_shared<ValueFunction>(agent.normalizer, config.value_config(),
                                                  ckpt.get_net("value"));
  }
  if (ckpt.contains_net("disc")) {
    agent.discriminator =
        std::make_shared<const Discriminator>(agent.normalizer, ckpt.get_net("disc"));
  }
  if (ckpt.contains_net("idm")) {
    const Vec mean = agent.normalizer.mean();
    const Vec var = agent.normalizer.variance();
    Vec mean2(2 * mean.size());
    Vec var2(2 * var.size());
    mean2 << mean, mean;
    var2 << var, var;
    agent.inverse_dynamics = std::make_shared<DiscretizedPolicy>(
        Normalizer(mean2, var2, agent.normalizer.count(), agent.normalizer.clip()),
        agent.policy->action_low(), agent.policy->action_high(), config.policy_config(),
        ckpt.get_net("idm"));
  }
  return agent;
}

std::string train_log_csv(const std::vector<TrainLogRow>& log) {
  std::string out = "step,value_loss,policy_loss,mean_weight\n";
  for (const auto& r : log) {
    out += std::to_string(r.step) + "," + format_double(r.value_loss) + "," +
           format_double(r.policy_loss) + "," + format_double(r.mean_weight) + "\n";
  }
  return out;
}

void TrainedAgent::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  to_checkpoint().write(dir / "checkpoint.txt");
  std::ofstream cfg(dir / "config.txt", std::ios::binary);
  cfg << config.to_map().serialize();
  std::ofstream log_out(dir / "train_log.csv", std::ios::binary);
  log_out << train_log_csv(log);
  if (!cfg || !log_out) throw std::runtime_error("failed writing agent to " + dir.string());
}

TrainedAgent TrainedAgent::load(const std::filesystem::path& dir) {
  const RunConfig config = RunConfig::from(ConfigMap::read(dir / "config.txt"));
  return from_checkpoint(Checkpoint::read(dir / "checkpoint.txt"), config);
}

// Trainers

namespace {

// Shared VfO / AWR-oracle loop. `value_batch` draws the TD batch.
template <typename ValueSampler>
void awr_loop(TrainedAgent& agent, ValueSampler& value_sampler, UniformSampler& policy_sampler,
              const RewardFn& reward_fn, UniformSampler* privileged_sampler) {
  const RunConfig& cfg = agent.config;
  const AwrConfig awr = cfg.awr_config();
  for (long long step = 1; step <= cfg.steps; ++step) {
    const TransitionBatch vb = value_sampler.sample_batch(cfg.batch_size);
    const Vec vr = reward_fn(vb);
    const TransitionBatch pb = policy_sampler.sample_batch(cfg.batch_size);
    const AwrStepResult pr = awr_step(*agent.policy, *agent.value, reward_fn, pb, awr);
    if (privileged_sampler != nullptr) {
      awr_step(*agent.policy, *agent.value, reward_fn,
               privileged_sampler->sample_batch(cfg.batch_size), awr);
    }
    const double vl = agent.value->value_step(vb, vr);
    if (should_log(cfg, step)) agent.log.push_back({step, vl, pr.loss, pr.mean_weight});
  }
  agent.value_updates = agent.value->updates();
  agent.policy_updates = agent.policy->optimizer().step;
}

}  // namespace

TrainedAgent train_vfo(const Dataset& expert, const Dataset& background,
                       const RunConfig& config, VfoVariant variant,
                       const Dataset* labeled_expert) {
  config.validate();
  check_background(background, config);
  check_expert(expert, background);

  TrainedAgent agent;
  agent.config = config;
  agent.config.algorithm =
      variant == VfoVariant::kBinary ? Algorithm::kVfoBin : Algorithm::kVfoDisc;
  agent.normalizer = make_normalizer(config, {&expert, &background});
  Rng value_init(sub_seed(config.seed, kValueInit));
  agent.value = std::make_shared<ValueFunction>(agent.normalizer, config.value_config(), value_init);
  agent.policy = make_policy(config, agent.normalizer);

  RewardFn reward_fn = binary_reward_fn();
  if (variant == VfoVariant::kDiscriminator) {
    agent.discriminator = std::make_shared<const Discriminator>(
        train_discriminator(expert, background, agent.normalizer,
                            config.discriminator_config(), sub_seed(config.seed, kDiscriminator)));
    reward_fn = discriminator_reward_fn(agent.discriminator);
  }

  MixtureSampler mixture(expert, background, config.alpha, sub_seed(config.seed, kMixtureSampler));
  UniformSampler policy_sampler(transitions(background), sub_seed(config.seed, kPolicySampler));
  std::optional<UniformSampler> privileged;
  if (config.privileged_expert_actions) {
    if (labeled_expert == nullptr || !labeled_expert->has_actions()) {
      throw std::invalid_argument("privileged expert actions need action-labeled expert data");
    }
    std::vector<Transition> pool = transitions(*labeled_expert);
    for (auto& t : pool) t.z = Origin::kExpert;
    privileged.emplace(std::move(pool), sub_seed(config.seed, kExpertSampler));
  }
  awr_loop(agent, mixture, policy_sampler, reward_fn, privileged ? &*privileged : nullptr);
  return agent;
}

TrainedAgent train_awr_oracle(const Dataset& background, const RunConfig& config) {
  config.validate();
  check_background(background, config);
  if (!background.has_rewards()) {
    throw std::invalid_argument("AWR oracle needs ground-truth rewards in the background data");
  }
  TrainedAgent agent;
  agent.config = config;
  agent.config.algorithm = Algorithm::kAwrOracle;
  agent.normalizer = make_normalizer(config, {&background});
  Rng value_init(sub_seed(config.seed, kValueInit));
  agent.value = std::make_shared<ValueFunction>(agent.normalizer, config.value_config(), value_init);
  agent.policy = make_policy(config, agent.normalizer);
  UniformSampler value_sampler(transitions(background), sub_seed(config.seed, kMixtureSampler));
  UniformSampler policy_sampler(transitions(background), sub_seed(config.seed, kPolicySampler));
  awr_loop(agent, value_sampler, policy_sampler, env_reward_fn(), nullptr);
  return agent;
}

TrainedAgent train_bc(const Dataset& background, const RunConfig& config) {
  config.validate();
  check_background(background, config);
  TrainedAgent agent;
  agent.config = config;
  agent.config.algorithm = Algorithm::kBc;
  agent.normalizer = make_normalizer(config, {&background});
  agent.policy = make_policy(config, agent.normalizer);
  UniformSampler sampler(transitions(background), sub_seed(config.seed, kPolicySampler));
  for (long long step = 1; step <= config.steps; ++step) {
    const TransitionBatch b = sampler.sample_batch(config.batch_size);
    const double loss = bc_step(*agent.policy, stack_states(b, false), stack_actions(b));
    if (should_log(config, step)) agent.log.push_back({step, 0.0, loss, 1.0});
  }
  agent.policy_updates = agent.policy->optimizer().step;
  return agent;
}

namespace {

Mat stack_pairs(const TransitionBatch& batch) {
  const Mat s = stack_states(batch, false);
  const Mat sn = stack_states(batch, true);
  Mat out(s.rows(), s.cols() + sn.cols());
  out << s, sn;
  return out;
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

double inverse_dynamics_accuracy(
    const DiscretizedPolicy& idm, const std::vector<Transition>& data,
    const std::function<bool(const Transition&, const Vec&)>& same) {
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& t : data) {
    const Vec predicted = idm.mode_action(concat(t.s, t.s_next));
    ++total;
    if (same(t, predicted)) ++hits;
  }
  if (total == 0) throw std::invalid_argument("no transitions to score");
  return static_cast<double>(hits) / static_cast<double>(total);
}

TrainedAgent train_bco(const Dataset& expert, const Dataset& background,
                       const RunConfig& config) {
  config.validate();
  check_background(background, config);
  check_expert(expert, background);
  TrainedAgent agent;
  agent.config = config;
  agent.config.algorithm = Algorithm::kBco;
  agent.normalizer = make_normalizer(config, {&expert, &background});
  agent.policy = make_policy(config, agent.normalizer);

  // Stage 1: inverse dynamics p(a | s, s') on background transitions, same
  // head as the policy.
  const Vec mean = agent.normalizer.mean();
  const Vec var = agent.normalizer.variance();
  const Normalizer pair_norm(concat(mean, mean), concat(var, var), agent.normalizer.count(),
                             agent.normalizer.clip());
  Rng idm_init(sub_seed(config.seed, kIdmInit));
  agent.inverse_dynamics = std::make_shared<DiscretizedPolicy>(
      pair_norm, agent.policy->action_low(), agent.policy->action_high(),
      config.policy_config(), idm_init);
  UniformSampler idm_sampler(transitions(background), sub_seed(config.seed, kIdmSampler));
  for (long long step = 1; step <= config.idm_steps; ++step) {
    const TransitionBatch b = idm_sampler.sample_batch(config.batch_size);
    bc_step(*agent.inverse_dynamics, stack_pairs(b), stack_actions(b));
  }

  // Stage 2: label the demonstrations with the most likely action.
  std::vector<Transition> labeled = transitions(expert);
  for (auto& t : labeled) t.a = agent.inverse_dynamics->mode_action(concat(t.s, t.s_next));

  // Stage 3: BC on a 50/50 mixture per batch.
  UniformSampler bg_sampler(transitions(background), sub_seed(config.seed, kPolicySampler));
  UniformSampler ex_sampler(std::move(labeled), sub_seed(config.seed, kExpertSampler));
  const std::size_t half = config.batch_size / 2;
  for (long long step = 1; step <= config.steps; ++step) {
    TransitionBatch b = bg_sampler.sample_batch(config.batch_size - half);
    if (half > 0) {
      const TransitionBatch e = ex_sampler.sample_batch(half);
      b.insert(b.end(), e.begin(), e.end());
    }
    const double loss = bc_step(*agent.policy, stack_states(b, false), stack_actions(b));
    if (should_log(config, step)) agent.log.push_back({step, 0.0, loss, 1.0});
  }
  agent.policy_updates = agent.policy->optimizer().step;
  return agent;
}

TrainedAgent train(const RunConfig& config, const Dataset* expert, const Dataset& background,
                   const Dataset* labeled_expert) {
  auto need_expert = [&]() -> const Dataset& {
    if (expert == nullptr) {
      throw std::invalid_argument(algorithm_name(config.algorithm) + " needs expert data");
    }
    return *expert;
  };
  switch (config.algorithm) {
    case Algorithm::kVfoBin:
      return train_vfo(need_expert(), background, config, VfoVariant::kBinary, labeled_expert);
    case Algorithm::kVfoDisc:
      return train_vfo(need_expert(), background, config, VfoVariant::kDiscriminator,
                       labeled_expert);
    case Algorithm::kBc: return train_bc(background, config);
    case Algorithm::kBco: return train_bco(need_expert(), background, config);
    case Algorithm::kAwrOracle: return train_awr_oracle(background, config);
  }
  throw std::logic_error("unhandled algorithm");
}

}  // namespace vfo
