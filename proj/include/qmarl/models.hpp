#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qmarl/random.hpp"

// Architecture-only interfaces shared by the quantum models and the classical
// baselines. Parameters live outside the model so the trainer can hold the
// critic and its target copy as plain vectors.

namespace qmarl {

class PolicyModel {
 public:
  virtual ~PolicyModel() = default;

  virtual std::size_t parameter_count() const = 0;
  virtual std::size_t action_count() const = 0;

  // Unnormalized action scores for one observation.
  virtual std::vector<double> logits(std::span<const double> observation,
                                     std::span<const double> params) const = 0;

  // Gradient w.r.t. params of dot(cotangent, logits(observation, params)).
  virtual std::vector<double> logits_vjp(
      std::span<const double> observation, std::span<const double> params,
      std::span<const double> cotangent) const = 0;

  virtual std::vector<double> initial_parameters(Rng& rng) const = 0;

  // Text that identifies the architecture in snapshots.
  virtual std::string describe() const = 0;
};

class ValueModel {
 public:
  virtual ~ValueModel() = default;

  virtual std::size_t parameter_count() const = 0;

  virtual double value(std::span<const double> state,
                       std::span<const double> params) const = 0;

  // Gradient w.r.t. params of value(state, params).
  virtual std::vector<double> value_gradient(
      std::span<const double> state, std::span<const double> params) const = 0;

  virtual std::vector<double> initial_parameters(Rng& rng) const = 0;

  virtual std::string describe() const = 0;
};

// A policy paired with an optional critic. A missing critic (or an actor
// without parameters) means the scheme is not trained.
struct Scheme {
  std::string name;
  std::shared_ptr<const PolicyModel> actor;
  std::shared_ptr<const ValueModel> critic;
  // Evaluate with argmax actions; false for schemes whose policy is the
  // distribution itself (the random walk).
  bool greedy_eval = true;

  bool trainable() const {
    return critic != nullptr && actor->parameter_count() > 0;
  }
};

}  // namespace qmarl
