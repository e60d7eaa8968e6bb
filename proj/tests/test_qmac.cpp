#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qmarl/errors.hpp"
#include "qmarl/qmac.hpp"

using namespace qmarl;
using namespace qmarl::qmac;
using std::numbers::pi;

namespace {

// 2 qubits, one full block and two trailing rotations: 8 parameters.
vqc::CircuitLayout toy_layout(std::vector<int> measured) {
  return vqc::CircuitLayout(2, {vqc::full_block(2)},
                            {{0, vqc::Axis::Y}, {1, vqc::Axis::X}},
                            std::move(measured));
}

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

EpisodeBatch toy_batch(Rng& rng, std::size_t steps, std::size_t agents,
                       std::size_t actions) {
  EpisodeBatch b;
  b.episode_starts.push_back(0);
  for (std::size_t t = 0; t < steps; ++t) {
    Transition tr;
    tr.state = random_vec(rng, 4, 0, 1);
    tr.next_state = random_vec(rng, 4, 0, 1);
    tr.reward = uniform(rng, -2, 2);
    tr.terminal = t + 1 == steps;
    for (std::size_t n = 0; n < agents; ++n) {
      tr.observations.push_back(random_vec(rng, 2, 0, 1));
      tr.actions.push_back({static_cast<int>(uniform_index(rng, actions))});
    }
    b.transitions.push_back(tr);
  }
  return b;
}

}  // namespace

TEST(QmacPolicy, ZeroParamsUniform) {
  const auto dist = policy_distribution(std::vector<double>(6, 0.0),
                                        std::vector<double>(54, 0.0));
  ASSERT_EQ(dist.probabilities.size(), 5u);
  for (double l : dist.logits) EXPECT_DOUBLE_EQ(l, 3.0);
  for (double p : dist.probabilities) EXPECT_NEAR(p, 0.2, 1e-15);
}

TEST(QmacPolicy, SoftmaxArithmetic) {
  const auto a = softmax_policy({0.3, -1.2, 2.0});
  const auto b = softmax_policy({100.3, 98.8, 102.0});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.probabilities[i], b.probabilities[i], 1e-12);
  const auto c = softmax_policy({std::log(2.0), 0.0});
  EXPECT_NEAR(c.probabilities[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.probabilities[1], 1.0 / 3.0, 1e-15);
  EXPECT_THROW(softmax_policy({NAN, 0.0}), NumericError);
}

TEST(QmacPolicy, SimplexOverRandomInputs) {
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const auto d = policy_distribution(random_vec(rng, 6, 0, 1),
                                       random_vec(rng, 54, -pi, pi));
    double sum = 0.0;
    for (double p : d.probabilities) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(QmacPolicy, SharedPolicyFollowsObservation) {
  env::FactoryConfig c;
  auto s = env::reset(c, std::uint64_t{3}).first;
  s.amr_loads[1] = 120;
  s.amr_loads[2] = 330;
  Rng rng(2);
  const auto params = random_vec(rng, 54, -pi, pi);
  const auto before1 = policy_distribution(env::observe(c, s, 1), params);
  std::swap(s.amr_loads[1], s.amr_loads[2]);
  // Agent 2 now sees agent 1's load but keeps its own index bits, so only
  // swapping the bits too must reproduce agent 1's distribution.
  auto obs2 = env::observe(c, s, 2);
  const auto bits1 = env::observe(c, s, 1);
  std::copy(bits1.begin(), bits1.begin() + env::kIndexBits, obs2.begin());
  EXPECT_EQ(policy_distribution(obs2, params).probabilities, before1.probabilities);
}

TEST(QmacSelect, GreedyAndTies) {
  Rng rng(0);
  PolicyOutput d{{}, {0.1, 0.6, 0.1, 0.1, 0.1}};
  EXPECT_EQ(select_action(d, SelectMode::Greedy, rng).index, 1);
  PolicyOutput tie{{}, {0.5, 0.5, 0, 0, 0}};
  EXPECT_EQ(select_action(tie, SelectMode::Greedy, rng).index, 0);
}

TEST(QmacSelect, SampleReproducibleAndDistributed) {
  PolicyOutput d{{}, {0.1, 0.2, 0.3, 0.4}};
  Rng a(5), b(5);
  std::vector<int> counts(4, 0);
  for (int k = 0; k < 40000; ++k) {
    const int x = select_action(d, SelectMode::Sample, a).index;
    ASSERT_EQ(x, select_action(d, SelectMode::Sample, b).index);
    ++counts[x];
  }
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(counts[i] / 40000.0, d.probabilities[i], 0.01);
}

TEST(QmacValue, Examples) {
  EXPECT_DOUBLE_EQ(value_estimate(std::vector<double>(14, 0.0),
                                  std::vector<double>(54, 0.0)),
                   35.0);
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const double v = value_estimate(random_vec(rng, 14, 0, 1), random_vec(rng, 54, -pi, pi));
    EXPECT_LE(std::abs(v), 35.0);
  }
  const QuantumCritic toy(vqc::CircuitLayout(1, {}, {{0, vqc::Axis::Y}}, {0}), 35.0);
  const std::vector<double> theta{pi};
  EXPECT_NEAR(toy.value(std::vector<double>{0.0}, theta), -35.0, 1e-12);
}

TEST(QmacTd, Examples) {
  EXPECT_NEAR(td_target(-1, 10, 5, 0.99), 3.9, 1e-12);
  EXPECT_EQ(td_target(0, 0, 0, 0.7), 0.0);
  EXPECT_EQ(td_target(-1, 123.0, 2, 0.99, true), -3.0);
}

TEST(QmacActorGradient, ZeroAdvantages) {
  Rng rng(4);
  const QuantumActor actor(toy_layout({0, 1}));
  const auto batch = toy_batch(rng, 3, 2, 2);
  const auto g = actor_loss_gradient(actor, batch, random_vec(rng, 8, -pi, pi),
                                     std::vector<double>(3, 0.0));
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(QmacActorGradient, MatchesFiniteDifference) {
  Rng rng(5);
  const QuantumActor actor(toy_layout({0, 1}), 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto batch = toy_batch(rng, 3, 2, 2);
    const auto theta = random_vec(rng, 8, -pi, pi);
    const auto y = random_vec(rng, 3, -2, 2);
    const auto g = actor_loss_gradient(actor, batch, theta, y);
    const double h = 1e-4;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      auto hi = theta, lo = theta;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (actor_loss(actor, batch, hi, y) - actor_loss(actor, batch, lo, y)) / (2 * h);
      EXPECT_NEAR(g[i], fd, 1e-5);
    }
  }
}

TEST(QmacActorGradient, SingleStepClosedForm) {
  // One timestep: the gradient is -y beta (e_a - p) pulled back through the
  // observable Jacobian.
  const QuantumActor actor(toy_layout({0, 1}), 3.0);
  EpisodeBatch b;
  Transition tr;
  tr.observations = {{0.3, 0.8}};
  tr.actions = {{1}};
  tr.state = tr.next_state = std::vector<double>(4, 0.0);
  b.transitions.push_back(tr);
  const std::vector<double> theta(8, 0.0), y{1.0};
  const auto g = actor_loss_gradient(actor, b, theta, y);
  const auto enc = vqc::encode_actor_observation(vqc::to_angles(tr.observations[0]), 2);
  const auto jac = vqc::parameter_shift_jacobian(actor.layout(), theta, enc);
  const auto p = policy_distribution(actor, tr.observations[0], theta).probabilities;
  for (std::size_t i = 0; i < 8; ++i) {
    const double expect = -1.0 * 3.0 * ((0 - p[0]) * jac(0, i) + (1 - p[1]) * jac(1, i));
    EXPECT_NEAR(g[i], expect, 1e-12);
  }
}

TEST(QmacActorGradient, SharedParametersSumAgents) {
  const QuantumActor actor(toy_layout({0, 1}));
  Rng rng(6);
  auto one = toy_batch(rng, 2, 1, 2);
  auto two = one;
  for (auto& tr : two.transitions) {
    tr.observations.push_back(tr.observations[0]);
    tr.actions.push_back(tr.actions[0]);
  }
  const auto theta = random_vec(rng, 8, -pi, pi);
  const std::vector<double> y{0.7, -1.3};
  const auto g1 = actor_loss_gradient(actor, one, theta, y);
  const auto g2 = actor_loss_gradient(actor, two, theta, y);
  for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g2[i], 2 * g1[i], 1e-12);
}

TEST(QmacActorGradient, EmptyBatch) {
  const QuantumActor actor(toy_layout({0, 1}));
  EXPECT_THROW(actor_loss_gradient(actor, EpisodeBatch{}, std::vector<double>(8), {}),
               ContractError);
}

TEST(QmacCriticGradient, MatchesFiniteDifference) {
  Rng rng(7);
  // Unit scale keeps the central-difference truncation error well below the
  // tolerance.
  const QuantumCritic critic(toy_layout({0}), 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto batch = toy_batch(rng, 3, 1, 2);
    const auto phi = random_vec(rng, 8, -pi, pi);
    const auto target = random_vec(rng, 8, -pi, pi);
    const auto g = critic_loss_gradient(critic, batch, phi, target, 0.9);
    const double h = 1e-4;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      auto hi = phi, lo = phi;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (critic_loss(critic, batch, hi, target, 0.9) -
                         critic_loss(critic, batch, lo, target, 0.9)) / (2 * h);
      EXPECT_NEAR(g[i], fd, 1e-5);
    }
  }
}

TEST(QmacCriticGradient, ZeroAndDoubledTargets) {
  Rng rng(8);
  const QuantumCritic critic(toy_layout({0}), 35.0);
  auto batch = toy_batch(rng, 3, 1, 2);
  const auto phi = random_vec(rng, 8, -pi, pi);
  const auto target = random_vec(rng, 8, -pi, pi);
  auto y = td_targets(critic, batch, phi, target, 0.99);
  // Rewards that cancel the bootstrap make every y_t zero.
  auto zeroed = batch;
  for (std::size_t t = 0; t < y.size(); ++t) zeroed.transitions[t].reward -= y[t];
  for (double v : critic_loss_gradient(critic, zeroed, phi, target, 0.99)) {
    EXPECT_NEAR(v, 0.0, 1e-12);
  }
  auto doubled = batch;
  for (std::size_t t = 0; t < y.size(); ++t) doubled.transitions[t].reward += y[t];
  const auto g = critic_loss_gradient(critic, batch, phi, target, 0.99);
  const auto g2 = critic_loss_gradient(critic, doubled, phi, target, 0.99);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g2[i], 2 * g[i], 1e-9);
  EXPECT_THROW(critic_loss_gradient(critic, EpisodeBatch{}, phi, target, 0.99), ContractError);
}

TEST(QmacAdam, FirstStepAndZeroGradient) {
  std::vector<double> p{0.5};
  AdamState s;
  adam_step(p, std::vector<double>{1.0}, s, 0.01, 0.0);
  EXPECT_NEAR(p[0], 0.49, 1e-6);
  std::vector<double> q{0.5, -2.0};
  AdamState s2;
  adam_step(q, std::vector<double>{0.0, 0.0}, s2, 0.01, 0.0);
  EXPECT_EQ(q, (std::vector<double>{0.5, -2.0}));
  EXPECT_THROW(adam_step(q, std::vector<double>{INFINITY, 0.0}, s2, 0.01, 0.0), NumericError);
  EXPECT_THROW(adam_step(q, std::vector<double>{0.0}, s2, 0.01, 0.0), ContractError);
}

TEST(QmacAdam, DecoupledWeightDecay) {
  std::vector<double> p{2.0};
  AdamState s;
  adam_step(p, std::vector<double>{0.0}, s, 0.1, 0.5);
  EXPECT_DOUBLE_EQ(p[0], 2.0 * (1 - 0.1 * 0.5));
}

TEST(QmacTarget, SyncCopies) {
  Rng rng(9);
  const auto phi = random_vec(rng, 54, -pi, pi);
  const auto t = sync_target(phi);
  EXPECT_EQ(t, phi);
  EXPECT_EQ(sync_target(t), t);
  const auto s = random_vec(rng, 14, 0, 1);
  EXPECT_EQ(value_estimate(s, phi), value_estimate(s, t));
}

namespace {

env::FactoryConfig small_env() {
  env::FactoryConfig c;
  c.num_agents = 2;
  c.episode_length = 6;
  return c;
}

}  // namespace

TEST(QmacTrain, ZeroEpochs) {
  TrainConfig t;
  t.max_epochs = 0;
  t.seed = 4;
  const auto r = train(small_env(), t);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.actor_params.size(), 54u);
  EXPECT_EQ(r.target_params, r.critic_params);
  for (double v : r.actor_params) EXPECT_LE(std::abs(v), t.init_scale);
  EXPECT_EQ(train(small_env(), t).actor_params, r.actor_params);
}

TEST(QmacTrain, TargetFrozenBetweenSyncs) {
  TrainConfig t;
  t.seed = 1;
  t.target_update_period = 4;
  t.max_epochs = 0;
  const auto init = train(small_env(), t);
  t.max_epochs = 3;
  const auto before = train(small_env(), t);
  EXPECT_EQ(before.target_params, init.critic_params);
  EXPECT_NE(before.critic_params, init.critic_params);
  t.max_epochs = 4;
  const auto at = train(small_env(), t);
  EXPECT_EQ(at.target_params, at.critic_params);
}

TEST(QmacTrain, Deterministic) {
  TrainConfig t;
  t.seed = 2;
  t.max_epochs = 3;
  const auto a = train(small_env(), t);
  const auto b = train(small_env(), t);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.actor_params, b.actor_params);
  ASSERT_EQ(a.records.size(), 3u);
  EXPECT_EQ(a.records[2].epoch, 2);
  EXPECT_EQ(a.records[0].kind, "train");
}

TEST(QmacRollout, BatchIsOnePolicyEpisode) {
  const auto c = small_env();
  TrainConfig t;
  const auto scheme = proposed_scheme(c, t);
  EpisodeBatch b;
  Rng rng(1);
  run_episode(c, scheme, std::vector<double>(54, 0.0), SelectMode::Sample, 7, rng, &b);
  ASSERT_EQ(b.size(), 6u);
  EXPECT_EQ(b.episode_starts, (std::vector<std::size_t>{0}));
  EXPECT_TRUE(b.transitions.back().terminal);
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    EXPECT_FALSE(b.transitions[k].terminal);
    EXPECT_EQ(b.transitions[k].next_state, b.transitions[k + 1].state);
  }
  b.clear();
  EXPECT_TRUE(b.empty());
}
