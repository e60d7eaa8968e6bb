#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qmarl/factory_env.hpp"
#include "qmarl/metrics.hpp"
#include "qmarl/models.hpp"
#include "qmarl/random.hpp"
#include "qmarl/vqc.hpp"

// Quantum multi-agent actor-critic with centralized training and
// decentralized execution: one parameter-shared VQC policy acts for every
// agent from its local observation, and a VQC critic values the global state.

namespace qmarl::qmac {

struct TrainConfig {
  double actor_lr = 1e-2;
  double critic_lr = 1e-3;
  double weight_decay = 1e-5;
  double gamma = 0.99;
  double beta_actor = 3.0;
  double beta_critic = 35.0;
  int target_update_period = 10;  // epochs
  int max_epochs = 1000;
  int eval_episodes = 100;
  std::uint64_t seed = 0;
  // Initial angles ~ U(-init_scale, init_scale).
  double init_scale = 3.14159265358979323846 / 50.0;

  void validate() const;
};

struct PolicyOutput {
  std::vector<double> logits;
  std::vector<double> probabilities;
};

// Numerically stable softmax of `logits`.
PolicyOutput softmax_policy(std::vector<double> logits);

// Softmax of beta * <Z> over the measured wires of `layout`.
class QuantumActor final : public PolicyModel {
 public:
  explicit QuantumActor(vqc::CircuitLayout layout, double beta = 3.0,
                        double init_scale = 3.14159265358979323846 / 50.0);

  std::size_t parameter_count() const override;
  std::size_t action_count() const override;
  std::vector<double> logits(std::span<const double> observation,
                             std::span<const double> params) const override;
  std::vector<double> logits_vjp(std::span<const double> observation,
                                 std::span<const double> params,
                                 std::span<const double> cotangent) const override;
  std::vector<double> initial_parameters(Rng& rng) const override;
  std::string describe() const override;

  const vqc::CircuitLayout& layout() const { return layout_; }
  double beta() const { return beta_; }

 private:
  vqc::CircuitLayout layout_;
  double beta_;
  double init_scale_;
};

// V(s) = beta * <Z> on the layout's first measured wire, with the state
// dense-encoded two variables per qubit.
class QuantumCritic final : public ValueModel {
 public:
  explicit QuantumCritic(vqc::CircuitLayout layout, double beta = 35.0,
                         double init_scale = 3.14159265358979323846 / 50.0);

  std::size_t parameter_count() const override;
  double value(std::span<const double> state,
               std::span<const double> params) const override;
  std::vector<double> value_gradient(
      std::span<const double> state,
      std::span<const double> params) const override;
  std::vector<double> initial_parameters(Rng& rng) const override;
  std::string describe() const override;

  const vqc::CircuitLayout& layout() const { return layout_; }
  double beta() const { return beta_; }

 private:
  vqc::CircuitLayout layout_;
  double beta_;
  double init_scale_;
};

// The proposed scheme: quantum actor + quantum critic on the default layouts.
Scheme proposed_scheme(const env::FactoryConfig& env_config,
                       const TrainConfig& train_config);

// Policy of `actor` (default: the 8-qubit actor with beta 3) for a
// normalized observation.
PolicyOutput policy_distribution(const PolicyModel& actor,
                                 std::span<const double> observation,
                                 std::span<const double> params);
PolicyOutput policy_distribution(std::span<const double> observation,
                                 std::span<const double> actor_params);

enum class SelectMode { Sample, Greedy };

// Sample draws from the categorical distribution; Greedy is argmax with ties
// to the lowest index.
env::AgentAction select_action(const PolicyOutput& dist, SelectMode mode,
                               Rng& rng);

// Value of the default 8-qubit critic with beta 35.
double value_estimate(std::span<const double> state_vars,
                      std::span<const double> critic_params);

// y = r + gamma * V_target(s') - V(s); terminal steps bootstrap from 0.
double td_target(double reward, double v_next_target, double v_current,
                 double gamma, bool terminal = false);

struct Transition {
  std::vector<double> state;
  std::vector<env::Observation> observations;
  std::vector<env::AgentAction> actions;
  double reward = 0.0;
  std::vector<double> next_state;
  std::vector<env::Observation> next_observations;
  bool terminal = false;
};

// On-policy rollout buffer, cleared after every update.
struct EpisodeBatch {
  std::vector<Transition> transitions;
  std::vector<std::size_t> episode_starts;

  bool empty() const { return transitions.empty(); }
  std::size_t size() const { return transitions.size(); }
  void clear() {
    transitions.clear();
    episode_starts.clear();
  }
};

// Detached advantages y_t for every transition of the batch.
std::vector<double> td_targets(const ValueModel& critic,
                               const EpisodeBatch& batch,
                               std::span<const double> critic_params,
                               std::span<const double> target_params,
                               double gamma);

// Gradient of -(1/T) sum_t sum_n y_t log pi(a^n_t | z^n_t). Throws
// ContractError on an empty batch.
std::vector<double> actor_loss_gradient(const PolicyModel& actor,
                                        const EpisodeBatch& batch,
                                        std::span<const double> actor_params,
                                        std::span<const double> advantages);

// Gradient of (1/T) sum_t y_t^2 w.r.t. the online critic parameters, with
// the target critic held fixed.
std::vector<double> critic_loss_gradient(const ValueModel& critic,
                                         const EpisodeBatch& batch,
                                         std::span<const double> critic_params,
                                         std::span<const double> target_params,
                                         double gamma);

// Scalar losses matching the two gradients above (for diagnostics and
// finite-difference checks).
double actor_loss(const PolicyModel& actor, const EpisodeBatch& batch,
                  std::span<const double> actor_params,
                  std::span<const double> advantages);
double critic_loss(const ValueModel& critic, const EpisodeBatch& batch,
                   std::span<const double> critic_params,
                   std::span<const double> target_params, double gamma);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Decoupled weight decay (p *= 1 - lr * wd) followed by a bias-corrected
// Adam step. Throws NumericError on a non-finite gradient.
void adam_step(std::vector<double>& params, std::span<const double> gradient,
               AdamState& state, double lr, double weight_decay);

inline std::vector<double> sync_target(std::span<const double> critic_params) {
  return {critic_params.begin(), critic_params.end()};
}

// Rolls out one episode with `scheme`'s policy. Transitions are appended to
// `batch` when given.
env::EpisodeSummary run_episode(const env::FactoryConfig& env_config,
                                const Scheme& scheme,
                                std::span<const double> actor_params,
                                SelectMode mode, std::uint64_t env_seed,
                                Rng& policy_rng, EpisodeBatch* batch);

struct TrainingResult {
  std::vector<double> actor_params;
  std::vector<double> critic_params;
  std::vector<double> target_params;
  std::vector<MetricsRecord> records;  // one "train" record per epoch
};

using EpochCallback = std::function<void(const MetricsRecord&)>;

// Algorithm: per epoch, one sampled episode, TD targets against the target
// critic, one actor and one critic Adam step, buffer cleared, target synced
// every target_update_period epochs.
TrainingResult train(const env::FactoryConfig& env_config,
                     const TrainConfig& train_config, const Scheme& scheme,
                     const EpochCallback& on_epoch = {});
TrainingResult train(const env::FactoryConfig& env_config,
                     const TrainConfig& train_config);

// Evaluation over `episodes` seeded episodes, greedy unless the scheme says
// otherwise; one "eval" record each.
std::vector<MetricsRecord> evaluate(const env::FactoryConfig& env_config,
                                    const Scheme& scheme,
                                    std::span<const double> actor_params,
                                    int episodes, std::uint64_t seed);

// Seed of the episode used in epoch `epoch` / evaluation episode `index`.
std::uint64_t train_episode_seed(std::uint64_t seed, int epoch);
std::uint64_t eval_episode_seed(std::uint64_t seed, int index);

}  // namespace qmarl::qmac
