#include "qmarl/qmac.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmarl/errors.hpp"

namespace qmarl::qmac {

void TrainConfig::validate() const {
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
    throw ConfigError("learning rates must be > 0");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ConfigError("gamma must lie in [0, 1)");
  }
  if (!(beta_actor > 0.0) || !(beta_critic > 0.0)) {
    throw ConfigError("observable scales must be > 0");
  }
  if (target_update_period < 1) {
    throw ConfigError("target_update_period must be >= 1");
  }
  if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (eval_episodes < 0) throw ConfigError("eval_episodes must be >= 0");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
}

PolicyOutput softmax_policy(std::vector<double> logits) {
  PolicyOutput out;
  out.logits = std::move(logits);
  for (double l : out.logits) {
    if (!std::isfinite(l)) throw NumericError("non-finite policy logit");
  }
  const double top = *std::max_element(out.logits.begin(), out.logits.end());
  out.probabilities.resize(out.logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.logits.size(); ++i) {
    out.probabilities[i] = std::exp(out.logits[i] - top);
    total += out.probabilities[i];
  }
  for (double& p : out.probabilities) p /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Quantum models

namespace {

std::vector<double> uniform_angles(std::size_t n, double scale, Rng& rng) {
  std::vector<double> out(n);
  for (double& v : out) v = uniform(rng, -scale, scale);
  return out;
}

}  // namespace

QuantumActor::QuantumActor(vqc::CircuitLayout layout, double beta,
                           double init_scale)
    : layout_(std::move(layout)), beta_(beta), init_scale_(init_scale) {}

std::size_t QuantumActor::parameter_count() const {
  return layout_.parameter_count();
}

std::size_t QuantumActor::action_count() const {
  return layout_.observable_count();
}

std::vector<double> QuantumActor::logits(std::span<const double> observation,
                                         std::span<const double> params) const {
  const auto encoded = vqc::encode_actor_observation(
      vqc::to_angles(observation), layout_.num_qubits());
  auto obs = vqc::evaluate_observables(layout_, params, encoded);
  for (double& o : obs) o *= beta_;
  return obs;
}

std::vector<double> QuantumActor::logits_vjp(
    std::span<const double> observation, std::span<const double> params,
    std::span<const double> cotangent) const {
  const auto encoded = vqc::encode_actor_observation(
      vqc::to_angles(observation), layout_.num_qubits());
  std::vector<double> upstream(cotangent.begin(), cotangent.end());
  for (double& u : upstream) u *= beta_;
  return vqc::parameter_shift_gradient(layout_, params, encoded, upstream);
}

std::vector<double> QuantumActor::initial_parameters(Rng& rng) const {
  return uniform_angles(parameter_count(), init_scale_, rng);
}

std::string QuantumActor::describe() const {
  return "quantum_actor beta=" + std::to_string(beta_) + "\n" +
         layout_.describe();
}

QuantumCritic::QuantumCritic(vqc::CircuitLayout layout, double beta,
                             double init_scale)
    : layout_(std::move(layout)), beta_(beta), init_scale_(init_scale) {}

std::size_t QuantumCritic::parameter_count() const {
  return layout_.parameter_count();
}

double QuantumCritic::value(std::span<const double> state,
                            std::span<const double> params) const {
  const auto encoded =
      vqc::encode_critic_state(vqc::to_angles(state), layout_.num_qubits());
  return beta_ * vqc::evaluate_observables(layout_, params, encoded)[0];
}

std::vector<double> QuantumCritic::value_gradient(
    std::span<const double> state, std::span<const double> params) const {
  const auto encoded =
      vqc::encode_critic_state(vqc::to_angles(state), layout_.num_qubits());
  std::vector<double> upstream(layout_.observable_count(), 0.0);
  upstream[0] = beta_;
  return vqc::parameter_shift_gradient(layout_, params, encoded, upstream);
}

std::vector<double> QuantumCritic::initial_parameters(Rng& rng) const {
  return uniform_angles(parameter_count(), init_scale_, rng);
}

std::string QuantumCritic::describe() const {
  return "quantum_critic beta=" + std::to_string(beta_) + "\n" +
         layout_.describe();
}

Scheme proposed_scheme(const env::FactoryConfig& env_config,
                       const TrainConfig& train_config) {
  env_config.validate();
  if (env_config.observation_size() > vqc::kDefaultQubits) {
    throw ConfigError("observation does not fit the actor register");
  }
  if (env_config.state_size() > 2 * vqc::kDefaultQubits) {
    throw ConfigError("state does not fit the critic register");
  }
  Scheme s;
  s.name = "proposed";
  s.actor = std::make_shared<QuantumActor>(
      vqc::actor_layout(env_config.action_count()), train_config.beta_actor,
      train_config.init_scale);
  s.critic = std::make_shared<QuantumCritic>(
      vqc::default_layout(vqc::Role::Critic), train_config.beta_critic,
      train_config.init_scale);
  return s;
}

// ---------------------------------------------------------------------------
// Policy and value

PolicyOutput policy_distribution(const PolicyModel& actor,
                                 std::span<const double> observation,
                                 std::span<const double> params) {
  return softmax_policy(actor.logits(observation, params));
}

PolicyOutput policy_distribution(std::span<const double> observation,
                                 std::span<const double> actor_params) {
  static const QuantumActor actor(vqc::default_layout(vqc::Role::Actor));
  return policy_distribution(actor, observation, actor_params);
}

env::AgentAction select_action(const PolicyOutput& dist, SelectMode mode,
                               Rng& rng) {
  const auto& p = dist.probabilities;
  if (p.empty()) throw ContractError("empty policy distribution");
  if (mode == SelectMode::Greedy) {
    return {static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin())};
  }
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return {static_cast<int>(i)};
  }
  // Rounding left u above the final partial sum; take the last non-zero entry.
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) return {static_cast<int>(i)};
  }
  return {0};
}

double value_estimate(std::span<const double> state_vars,
                      std::span<const double> critic_params) {
  static const QuantumCritic critic(vqc::default_layout(vqc::Role::Critic));
  return critic.value(state_vars, critic_params);
}

double td_target(double reward, double v_next_target, double v_current,
                 double gamma, bool terminal) {
  return reward + (terminal ? 0.0 : gamma * v_next_target) - v_current;
}

// ---------------------------------------------------------------------------
// Losses

std::vector<double> td_targets(const ValueModel& critic,
                               const EpisodeBatch& batch,
                               std::span<const double> critic_params,
                               std::span<const double> target_params,
                               double gamma) {
  std::vector<double> y;
  y.reserve(batch.size());
  for (const auto& tr : batch.transitions) {
    const double v = critic.value(tr.state, critic_params);
    const double v_next =
        tr.terminal ? 0.0 : critic.value(tr.next_state, target_params);
    y.push_back(td_target(tr.reward, v_next, v, gamma, tr.terminal));
  }
  return y;
}

namespace {

void check_batch(const EpisodeBatch& batch, std::span<const double> weights) {
  if (batch.empty()) throw ContractError("empty batch");
  if (weights.size() != batch.size()) {
    throw ContractError("one advantage per transition required");
  }
}

}  // namespace

std::vector<double> actor_loss_gradient(const PolicyModel& actor,
                                        const EpisodeBatch& batch,
                                        std::span<const double> actor_params,
                                        std::span<const double> advantages) {
  check_batch(batch, advantages);
  const double inv_t = 1.0 / static_cast<double>(batch.size());
  std::vector<double> grad(actor.parameter_count(), 0.0);
  std::vector<double> cot(actor.action_count());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const double y = advantages[t];
    if (!std::isfinite(y)) throw NumericError("non-finite advantage");
    if (y == 0.0) continue;
    const auto& tr = batch.transitions[t];
    for (std::size_t n = 0; n < tr.observations.size(); ++n) {
      const auto dist =
          policy_distribution(actor, tr.observations[n], actor_params);
      // d(-y log softmax_a)/d logits = -y (e_a - p)
      for (std::size_t k = 0; k < cot.size(); ++k) {
        const double onehot = static_cast<int>(k) == tr.actions[n].index;
        cot[k] = -y * inv_t * (onehot - dist.probabilities[k]);
      }
      const auto g = actor.logits_vjp(tr.observations[n], actor_params, cot);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
    }
  }
  return grad;
}

double actor_loss(const PolicyModel& actor, const EpisodeBatch& batch,
                  std::span<const double> actor_params,
                  std::span<const double> advantages) {
  check_batch(batch, advantages);
  double loss = 0.0;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const auto& tr = batch.transitions[t];
    for (std::size_t n = 0; n < tr.observations.size(); ++n) {
      const auto dist =
          policy_distribution(actor, tr.observations[n], actor_params);
      loss -= advantages[t] * std::log(dist.probabilities[tr.actions[n].index]);
    }
  }
  return loss / static_cast<double>(batch.size());
}

std::vector<double> critic_loss_gradient(const ValueModel& critic,
                                         const EpisodeBatch& batch,
                                         std::span<const double> critic_params,
                                         std::span<const double> target_params,
                                         double gamma) {
  if (batch.empty()) throw ContractError("empty batch");
  const auto y = td_targets(critic, batch, critic_params, target_params, gamma);
  const double inv_t = 1.0 / static_cast<double>(batch.size());
  std::vector<double> grad(critic.parameter_count(), 0.0);
  for (std::size_t t = 0; t < batch.size(); ++t) {
    if (!std::isfinite(y[t])) throw NumericError("non-finite TD target");
    if (y[t] == 0.0) continue;
    // d y_t^2 / d phi = 2 y_t * (-dV(s_t)/d phi)
    const auto g = critic.value_gradient(batch.transitions[t].state, critic_params);
    const double scale = -2.0 * y[t] * inv_t;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += scale * g[i];
  }
  return grad;
}

double critic_loss(const ValueModel& critic, const EpisodeBatch& batch,
                   std::span<const double> critic_params,
                   std::span<const double> target_params, double gamma) {
  if (batch.empty()) throw ContractError("empty batch");
  const auto y = td_targets(critic, batch, critic_params, target_params, gamma);
  double loss = 0.0;
  for (double v : y) loss += v * v;
  return loss / static_cast<double>(batch.size());
}

// ---------------------------------------------------------------------------
// Optimizer

void adam_step(std::vector<double>& params, std::span<const double> gradient,
               AdamState& state, double lr, double weight_decay) {
  if (gradient.size() != params.size()) {
    throw ContractError("gradient length does not match parameters");
  }
  for (double g : gradient) {
    if (!std::isfinite(g)) throw NumericError("non-finite gradient");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] *= 1.0 - lr * weight_decay;
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * gradient[i];
    state.v[i] = state.beta2 * state.v[i] +
                 (1.0 - state.beta2) * gradient[i] * gradient[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

// ---------------------------------------------------------------------------
// Rollouts and training

std::uint64_t train_episode_seed(std::uint64_t seed, int epoch) {
  return mix_seed(mix_seed(seed, 0x7261696E), static_cast<std::uint64_t>(epoch));
}

std::uint64_t eval_episode_seed(std::uint64_t seed, int index) {
  return mix_seed(mix_seed(seed, 0x6576616C), static_cast<std::uint64_t>(index));
}

env::EpisodeSummary run_episode(const env::FactoryConfig& env_config,
                                const Scheme& scheme,
                                std::span<const double> actor_params,
                                SelectMode mode, std::uint64_t env_seed,
                                Rng& policy_rng, EpisodeBatch* batch) {
  Rng env_rng(env_seed);
  auto [state, obs] = env::reset(env_config, env_rng);
  env::EpisodeAccumulator acc(env_config);
  if (batch) batch->episode_starts.push_back(batch->size());
  const auto n_agents = static_cast<std::size_t>(env_config.num_agents);
  while (state.t < env_config.episode_length) {
    std::vector<env::AgentAction> actions(n_agents);
    for (std::size_t n = 0; n < n_agents; ++n) {
      const auto dist = policy_distribution(*scheme.actor, obs[n], actor_params);
      actions[n] = select_action(dist, mode, policy_rng);
    }
    auto outcome = env::step(env_config, state, actions, env_rng);
    if (batch) {
      Transition tr;
      tr.state = env::state_vector(env_config, state);
      tr.observations = obs;
      tr.actions = actions;
      tr.reward = outcome.reward;
      tr.next_state = env::state_vector(env_config, outcome.next);
      tr.next_observations = outcome.observations;
      tr.terminal = outcome.done;
      batch->transitions.push_back(std::move(tr));
    }
    acc.add(outcome);
    state = std::move(outcome.next);
    obs = std::move(outcome.observations);
  }
  return acc.summary();
}

TrainingResult train(const env::FactoryConfig& env_config,
                     const TrainConfig& train_config, const Scheme& scheme,
                     const EpochCallback& on_epoch) {
  env_config.validate();
  train_config.validate();
  if (!scheme.actor) throw ConfigError("scheme has no actor");

  TrainingResult result;
  Rng init_rng(mix_seed(train_config.seed, 0x696E6974));
  result.actor_params = scheme.actor->initial_parameters(init_rng);
  if (scheme.critic) {
    result.critic_params = scheme.critic->initial_parameters(init_rng);
  }
  result.target_params = sync_target(result.critic_params);

  Rng policy_rng(mix_seed(train_config.seed, 0x706F6C69));
  AdamState actor_opt;
  AdamState critic_opt;
  EpisodeBatch batch;
  const bool learn = scheme.trainable();

  for (int epoch = 0; epoch < train_config.max_epochs; ++epoch) {
    batch.clear();
    const auto summary = run_episode(
        env_config, scheme, result.actor_params, SelectMode::Sample,
        train_episode_seed(train_config.seed, epoch), policy_rng,
        learn ? &batch : nullptr);
    if (learn) {
      try {
        const auto y = td_targets(*scheme.critic, batch, result.critic_params,
                                  result.target_params, train_config.gamma);
        const auto actor_grad = actor_loss_gradient(
            *scheme.actor, batch, result.actor_params, y);
        const auto critic_grad =
            critic_loss_gradient(*scheme.critic, batch, result.critic_params,
                                 result.target_params, train_config.gamma);
        adam_step(result.actor_params, actor_grad, actor_opt,
                  train_config.actor_lr, train_config.weight_decay);
        adam_step(result.critic_params, critic_grad, critic_opt,
                  train_config.critic_lr, train_config.weight_decay);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
      }
      if ((epoch + 1) % train_config.target_update_period == 0) {
        result.target_params = sync_target(result.critic_params);
      }
    }
    result.records.push_back(
        make_record(scheme.name, train_config.seed, "train", epoch, summary));
    if (on_epoch) on_epoch(result.records.back());
  }
  return result;
}

TrainingResult train(const env::FactoryConfig& env_config,
                     const TrainConfig& train_config) {
  return train(env_config, train_config,
               proposed_scheme(env_config, train_config));
}

std::vector<MetricsRecord> evaluate(const env::FactoryConfig& env_config,
                                    const Scheme& scheme,
                                    std::span<const double> actor_params,
                                    int episodes, std::uint64_t seed) {
  std::vector<MetricsRecord> out;
  Rng policy_rng(mix_seed(seed, 0x65706F6C));
  const SelectMode mode =
      scheme.greedy_eval ? SelectMode::Greedy : SelectMode::Sample;
  for (int i = 0; i < episodes; ++i) {
    const auto summary =
        run_episode(env_config, scheme, actor_params, mode,
                    eval_episode_seed(seed, i), policy_rng, nullptr);
    out.push_back(make_record(scheme.name, seed, "eval", i, summary));
  }
  return out;
}

}  // namespace qmarl::qmac
