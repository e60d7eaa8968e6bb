#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmarl/factory_env.hpp"
#include "qmarl/models.hpp"
#include "qmarl/qmac.hpp"
#include "qmarl/random.hpp"

// Comparison schemes: classical actor-critic at a small and a large
// parameter budget, a quantum actor with a classical critic, and a uniform
// random walk.

namespace qmarl::baselines {

enum class Activation { Relu, Tanh, Identity };

// Fully connected network. Parameters are stored flat outside the net,
// layer by layer: weights (out x in, row-major) then biases.
class DenseNet {
 public:
  // `sizes` holds the input width followed by every layer's width;
  // `activations` has one entry per layer.
  DenseNet(std::vector<std::size_t> sizes, std::vector<Activation> activations);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  const std::vector<Activation>& activations() const { return activations_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return parameter_count_; }

  std::vector<double> forward(std::span<const double> params,
                              std::span<const double> input) const;

  // Gradient w.r.t. params of dot(upstream, forward(params, input)).
  std::vector<double> backward(std::span<const double> params,
                               std::span<const double> input,
                               std::span<const double> upstream) const;

  // Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0.
  std::vector<double> initial_parameters(Rng& rng) const;

  std::string describe() const;

 private:
  void check(std::span<const double> params,
             std::span<const double> input) const;

  std::vector<std::size_t> sizes_;
  std::vector<Activation> activations_;
  std::size_t parameter_count_ = 0;
};

// Hidden layers use `hidden` and the output layer is linear.
DenseNet make_mlp(std::size_t inputs, std::size_t outputs,
                  std::size_t hidden_layers, std::size_t width,
                  Activation hidden);

// Width that brings make_mlp's parameter count closest to `target`
// (ties to the narrower net).
std::size_t size_hidden_width(std::size_t inputs, std::size_t outputs,
                              std::size_t hidden_layers, double target);

class DenseActor final : public PolicyModel {
 public:
  explicit DenseActor(DenseNet net);

  std::size_t parameter_count() const override;
  std::size_t action_count() const override;
  std::vector<double> logits(std::span<const double> observation,
                             std::span<const double> params) const override;
  std::vector<double> logits_vjp(std::span<const double> observation,
                                 std::span<const double> params,
                                 std::span<const double> cotangent) const override;
  std::vector<double> initial_parameters(Rng& rng) const override;
  std::string describe() const override;

  const DenseNet& net() const { return net_; }

 private:
  DenseNet net_;
};

class DenseCritic final : public ValueModel {
 public:
  explicit DenseCritic(DenseNet net);

  std::size_t parameter_count() const override;
  double value(std::span<const double> state,
               std::span<const double> params) const override;
  std::vector<double> value_gradient(
      std::span<const double> state,
      std::span<const double> params) const override;
  std::vector<double> initial_parameters(Rng& rng) const override;
  std::string describe() const override;

  const DenseNet& net() const { return net_; }

 private:
  DenseNet net_;
};

// Parameterless policy with equal logits for every action.
class UniformPolicy final : public PolicyModel {
 public:
  explicit UniformPolicy(std::size_t actions);

  std::size_t parameter_count() const override { return 0; }
  std::size_t action_count() const override { return actions_; }
  std::vector<double> logits(std::span<const double> observation,
                             std::span<const double> params) const override;
  std::vector<double> logits_vjp(std::span<const double> observation,
                                 std::span<const double> params,
                                 std::span<const double> cotangent) const override;
  std::vector<double> initial_parameters(Rng& rng) const override;
  std::string describe() const override;

 private:
  std::size_t actions_;
};

enum class BaselineKind { Comp1Hybrid, Comp2Small, Comp3Large, Comp4Random };

struct BaselineSpec {
  BaselineKind kind = BaselineKind::Comp2Small;
  // Total actor + critic parameters; 0 picks the kind's default
  // (110 for comp1/comp2, 40000 for comp3).
  double budget = 0.0;
};

double default_budget(BaselineKind kind);
std::string_view scheme_name(BaselineKind kind);
// Accepts "comp1".."comp4" and the long names. Throws ConfigError.
BaselineKind parse_kind(std::string_view name);

// Builds the scheme for the environment's dimensions. Classical networks get
// half the budget each (comp1's critic gets what the quantum actor leaves).
// Throws ConfigError when the closest sizing misses the budget by more than
// 10 %.
Scheme build_baseline(const BaselineSpec& spec,
                      const env::FactoryConfig& env_config,
                      const qmac::TrainConfig& train_config = {});

// Uniform draw over the environment's action catalog; ignores `observation`.
env::AgentAction random_walk_policy(std::span<const double> observation,
                                    Rng& rng, int action_count = 5);

}  // namespace qmarl::baselines
