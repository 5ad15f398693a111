#include <filesystem>

#include <gtest/gtest.h>

#include "vfo/algorithms.h"
#include "vfo/benchgen.h"
#include "vfo/eval.h"
#include "vfo/report.h"

namespace vfo {
namespace {

// Entering the goal pays 1 and the agent then stays there.
const ConfigMap kGrid5{{"width", "5"}, {"height", "5"}, {"slip", "0"}, {"absorbing_goal", "true"}};

RunConfig small_config(Algorithm algo, long long steps) {
  RunConfig c;
  c.algorithm = algo;
  c.env_config = kGrid5;
  c.steps = steps;
  c.hidden = {32};
  c.disc_steps = 500;
  c.idm_steps = 1500;
  c.seed = 3;
  return c;
}

Dataset random_background(int n, std::uint64_t seed) {
  const auto env = make_env("gridworld", kGrid5);
  return make_dataset(rollout(*env, uniform_random_policy(env->spec()), n, seed),
                      Origin::kBackground, "gridworld", kGrid5);
}

// Expert move with probability 0.6, otherwise uniform: the majority action
// at every state is well defined.
Dataset noisy_expert_background(int n, std::uint64_t seed) {
  const auto env = make_env("gridworld", kGrid5);
  const PolicyFn expert = env->expert_policy();
  const PolicyFn random = uniform_random_policy(env->spec());
  const PolicyFn noisy = [&](const Vec& s, Rng& rng) {
    return uniform01(rng) < 0.6 ? expert(s, rng) : random(s, rng);
  };
  return make_dataset(rollout(*env, noisy, n, seed), Origin::kBackground, "gridworld", kGrid5);
}

double success(const TrainedAgent& agent) {
  const auto env = agent.config.make_env();
  return evaluate(agent, *env, 200, 1, 99).success_rate;
}

double argmax_agreement(const TrainedAgent& a, const TrainedAgent& b, const Dataset& data) {
  int same = 0, total = 0;
  for (const auto& s : all_states(data)) {
    same += a.policy->mode_action(s) == b.policy->mode_action(s);
    ++total;
  }
  return same / static_cast<double>(total);
}

class AlgorithmsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    expert_ = new ExpertData(generate_expert_data("gridworld", kGrid5, 50, 1));
    random_ = new Dataset(random_background(200, 2));
  }
  static void TearDownTestSuite() {
    delete expert_;
    delete random_;
  }
  static ExpertData* expert_;
  static Dataset* random_;
};
ExpertData* AlgorithmsTest::expert_ = nullptr;
Dataset* AlgorithmsTest::random_ = nullptr;

TEST_F(AlgorithmsTest, VfoBinBeatsRandomBackground) {
  const TrainedAgent agent =
      train(small_config(Algorithm::kVfoBin, 3000), &expert_->stripped, *random_);
  const auto env = agent.config.make_env();
  const double bg = summarize(dataset_rows(*random_, *env, "bg")).success_rate;
  EXPECT_GE(success(agent) - bg, 0.3);
  EXPECT_EQ(agent.value_updates, 3000);
  EXPECT_EQ(agent.policy_updates, 3000);
}

TEST_F(AlgorithmsTest, VfoOnExpertBackgroundIsNearExpert) {
  const TrainedAgent agent =
      train(small_config(Algorithm::kVfoBin, 2000), &expert_->stripped, expert_->labeled);
  EXPECT_GE(success(agent), 0.95);
}

TEST_F(AlgorithmsTest, VfoDiscBeatsRandomBackground) {
  const TrainedAgent agent =
      train(small_config(Algorithm::kVfoDisc, 3000), &expert_->stripped, *random_);
  ASSERT_TRUE(agent.discriminator);
  const auto env = agent.config.make_env();
  const double bg = summarize(dataset_rows(*random_, *env, "bg")).success_rate;
  EXPECT_GE(success(agent) - bg, 0.3);
}

TEST_F(AlgorithmsTest, HugeLambdaDegeneratesToBc) {
  const Dataset bg = noisy_expert_background(200, 5);
  RunConfig c = small_config(Algorithm::kVfoBin, 1500);
  c.lambda = 1e6;
  // VfO fits its normalizer on both datasets, BC on D_B only.
  c.normalize = false;
  const TrainedAgent vfo = train(c, &expert_->stripped, bg);
  c.algorithm = Algorithm::kBc;
  const TrainedAgent bc = train(c, nullptr, bg);
  EXPECT_GE(argmax_agreement(vfo, bc, bg), 0.99);
}

TEST_F(AlgorithmsTest, BcOnExpertDataIsNearExpert) {
  const TrainedAgent bc = train(small_config(Algorithm::kBc, 2000), nullptr, expert_->labeled);
  EXPECT_GE(success(bc), 0.95);
}

TEST_F(AlgorithmsTest, BcIsDeterministic) {
  const RunConfig c = small_config(Algorithm::kBc, 200);
  const TrainedAgent a = train(c, nullptr, *random_);
  const TrainedAgent b = train(c, nullptr, *random_);
  EXPECT_EQ(a.to_checkpoint().serialize(), b.to_checkpoint().serialize());
  RunConfig other = c;
  other.seed = 4;
  EXPECT_NE(train(other, nullptr, *random_).to_checkpoint().serialize(),
            a.to_checkpoint().serialize());
}

TEST_F(AlgorithmsTest, BcoInverseDynamicsAndReturn) {
  const TrainedAgent bco =
      train(small_config(Algorithm::kBco, 2000), &expert_->stripped, *random_);
  ASSERT_TRUE(bco.inverse_dynamics);
  const auto g = GridWorld(GridWorld::config_from(kGrid5));
  // Held-out background transitions that moved; the move is then determined
  // by (s, s').
  std::vector<Transition> held;
  for (const auto& t : transitions(random_background(100, 77))) {
    if (t.s != t.s_next) held.push_back(t);
  }
  const double acc = inverse_dynamics_accuracy(
      *bco.inverse_dynamics, held, [&](const Transition& t, const Vec& predicted) {
        return g.neighbor(g.decode(t.s), GridWorld::move_from_action(predicted[0])) ==
               g.decode(t.s_next);
      });
  EXPECT_GE(acc, 0.99);
  const TrainedAgent bc = train(small_config(Algorithm::kBc, 2000), nullptr, *random_);
  EXPECT_GE(success(bco), success(bc));
}

TEST_F(AlgorithmsTest, AwrOracleBeatsRandomBackground) {
  RunConfig c = small_config(Algorithm::kAwrOracle, 3000);
  c.lambda = 0.1;
  const TrainedAgent agent = train(c, nullptr, *random_);
  const auto env = agent.config.make_env();
  const double bg = summarize(dataset_rows(*random_, *env, "bg")).success_rate;
  EXPECT_GE(success(agent) - bg, 0.3);
}

TEST_F(AlgorithmsTest, AwrOracleNeedsRewards) {
  Dataset no_rewards = *random_;
  for (auto& t : no_rewards.trajectories) t.rewards.reset();
  EXPECT_THROW(train(small_config(Algorithm::kAwrOracle, 10), nullptr, no_rewards),
               std::invalid_argument);
}

TEST_F(AlgorithmsTest, InputChecks) {
  const RunConfig c = small_config(Algorithm::kVfoBin, 10);
  EXPECT_THROW(train(c, nullptr, *random_), std::invalid_argument);
  EXPECT_THROW(train(c, &expert_->labeled, *random_), std::invalid_argument);
  EXPECT_THROW(train(c, &expert_->stripped, expert_->stripped), std::invalid_argument);
  RunConfig privileged = c;
  privileged.privileged_expert_actions = true;
  EXPECT_THROW(train(privileged, &expert_->stripped, *random_), std::invalid_argument);
  EXPECT_NO_THROW(train(privileged, &expert_->stripped, *random_, &expert_->labeled));
  RunConfig wrong_env = c;
  wrong_env.env_name = "pointmass";
  EXPECT_THROW(train(wrong_env, &expert_->stripped, *random_), std::invalid_argument);
}

TEST_F(AlgorithmsTest, LearningNeverReadsExpertActionsOrRewards) {
  // Corrupting what VfO must not see leaves the result unchanged.
  const RunConfig c = small_config(Algorithm::kVfoBin, 300);
  Dataset bg_no_reward = *random_;
  for (auto& t : bg_no_reward.trajectories) t.rewards.reset();
  const TrainedAgent a = train(c, &expert_->stripped, *random_);
  const TrainedAgent b = train(c, &expert_->stripped, bg_no_reward);
  EXPECT_EQ(a.to_checkpoint().serialize(), b.to_checkpoint().serialize());
}

TEST_F(AlgorithmsTest, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "vfo_test_agent";
  std::filesystem::remove_all(dir);
  const TrainedAgent a = train(small_config(Algorithm::kBco, 100), &expert_->stripped, *random_);
  a.save(dir);
  const TrainedAgent b = TrainedAgent::load(dir);
  EXPECT_EQ(a.to_checkpoint().serialize(), b.to_checkpoint().serialize());
  EXPECT_EQ(b.config.to_map().serialize(), a.config.to_map().serialize());
  const Vec s = all_states(*random_)[5];
  EXPECT_EQ(a.policy->probabilities(s), b.policy->probabilities(s));
  EXPECT_TRUE(std::filesystem::exists(dir / "train_log.csv"));
}

TEST(InverseDynamicsLoss, GradientMatchesFiniteDifferences) {
  // The inverse model is a discretized head on (s, s') pairs.
  Rng init(12);
  PolicyConfig pc;
  pc.num_bins = 4;
  pc.hidden = {4};
  pc.kernel_bandwidth = 0.5;
  const DiscretizedPolicy idm(Normalizer::identity(4), Vec::Constant(1, -1.0),
                              Vec::Constant(1, 1.0), pc, init);
  ASSERT_LE(idm.net().num_parameters(), 64u);
  const Mat pairs = Mat::Random(8, 4);
  const Mat actions = Mat::Random(8, 1);
  const Vec ones = Vec::Ones(8);
  nn::DenseNet net = idm.net();
  const Vec numeric = nn::numerical_gradient(net, [&](const nn::DenseNet& n) {
    DiscretizedPolicy q = idm;
    q.set_net(n);
    return q.weighted_nll(pairs, actions, ones);
  });
  EXPECT_LT(nn::relative_error(idm.weighted_nll_gradient(pairs, actions, ones).flatten(), numeric),
            1e-5);
}

}  // namespace
}  // namespace vfo
