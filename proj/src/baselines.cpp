#include "qmarl/baselines.hpp"

#include <cmath>
#include <sstream>

#include "qmarl/errors.hpp"

namespace qmarl::baselines {

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Identity:
      return x;
  }
  return x;
}

// Derivative expressed through the pre-activation `x` and output `y`.
double activate_grad(Activation a, double x, double y) {
  switch (a) {
    case Activation::Relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh:
      return 1.0 - y * y;
    case Activation::Identity:
      return 1.0;
  }
  return 1.0;
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
    case Activation::Identity:
      return "identity";
  }
  return "?";
}

std::size_t mlp_count(std::size_t inputs, std::size_t outputs,
                      std::size_t hidden_layers, std::size_t width) {
  if (hidden_layers == 0) return (inputs + 1) * outputs;
  return (inputs + 1) * width + (hidden_layers - 1) * (width + 1) * width +
         (width + 1) * outputs;
}

}  // namespace

DenseNet::DenseNet(std::vector<std::size_t> sizes,
                   std::vector<Activation> activations)
    : sizes_(std::move(sizes)), activations_(std::move(activations)) {
  if (sizes_.size() < 2) throw ConfigError("dense net needs at least one layer");
  if (activations_.size() != sizes_.size() - 1) {
    throw ConfigError("one activation per layer required");
  }
  for (std::size_t s : sizes_) {
    if (s == 0) throw ConfigError("dense layer widths must be >= 1");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    parameter_count_ += (sizes_[l] + 1) * sizes_[l + 1];
  }
}

void DenseNet::check(std::span<const double> params,
                     std::span<const double> input) const {
  if (params.size() != parameter_count_) {
    throw ContractError("dense net expects " +
                        std::to_string(parameter_count_) + " parameters, got " +
                        std::to_string(params.size()));
  }
  if (input.size() != input_size()) {
    throw ContractError("dense net expects input of width " +
                        std::to_string(input_size()) + ", got " +
                        std::to_string(input.size()));
  }
}

std::vector<double> DenseNet::forward(std::span<const double> params,
                                      std::span<const double> input) const {
  check(params, input);
  std::vector<double> x(input.begin(), input.end());
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* w = params.data() + offset;
    const double* b = w + in * out;
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += w[o * in + i] * x[i];
      y[o] = activate(activations_[l], acc);
    }
    offset += (in + 1) * out;
    x = std::move(y);
  }
  return x;
}

std::vector<double> DenseNet::backward(std::span<const double> params,
                                       std::span<const double> input,
                                       std::span<const double> upstream) const {
  check(params, input);
  if (upstream.size() != output_size()) {
    throw ContractError("upstream width does not match the output layer");
  }
  const std::size_t layers = sizes_.size() - 1;
  // Layer inputs and pre-activations from a forward pass.
  std::vector<std::vector<double>> xs(layers + 1);
  std::vector<std::vector<double>> zs(layers);
  std::vector<std::size_t> offsets(layers);
  xs[0].assign(input.begin(), input.end());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    offsets[l] = offset;
    const double* w = params.data() + offset;
    const double* b = w + in * out;
    zs[l].resize(out);
    xs[l + 1].resize(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += w[o * in + i] * xs[l][i];
      zs[l][o] = acc;
      xs[l + 1][o] = activate(activations_[l], acc);
    }
    offset += (in + 1) * out;
  }

  std::vector<double> grad(parameter_count_, 0.0);
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* w = params.data() + offsets[l];
    double* gw = grad.data() + offsets[l];
    double* gb = gw + in * out;
    for (std::size_t o = 0; o < out; ++o) {
      delta[o] *= activate_grad(activations_[l], zs[l][o], xs[l + 1][o]);
    }
    std::vector<double> below(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      gb[o] += delta[o];
      for (std::size_t i = 0; i < in; ++i) {
        gw[o * in + i] += delta[o] * xs[l][i];
        below[i] += w[o * in + i] * delta[o];
      }
    }
    delta = std::move(below);
  }
  return grad;
}

std::vector<double> DenseNet::initial_parameters(Rng& rng) const {
  std::vector<double> params(parameter_count_, 0.0);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t k = 0; k < in * out; ++k) {
      params[offset + k] = uniform(rng, -bound, bound);
    }
    offset += (in + 1) * out;
  }
  return params;
}

std::string DenseNet::describe() const {
  std::ostringstream os;
  os << "dense";
  for (std::size_t l = 0; l < sizes_.size(); ++l) {
    os << (l == 0 ? " " : "-") << sizes_[l];
  }
  os << " act";
  for (Activation a : activations_) os << ' ' << activation_name(a);
  os << " params " << parameter_count_;
  return os.str();
}

DenseNet make_mlp(std::size_t inputs, std::size_t outputs,
                  std::size_t hidden_layers, std::size_t width,
                  Activation hidden) {
  std::vector<std::size_t> sizes{inputs};
  std::vector<Activation> acts;
  for (std::size_t h = 0; h < hidden_layers; ++h) {
    sizes.push_back(width);
    acts.push_back(hidden);
  }
  sizes.push_back(outputs);
  acts.push_back(Activation::Identity);
  return DenseNet(std::move(sizes), std::move(acts));
}

std::size_t size_hidden_width(std::size_t inputs, std::size_t outputs,
                              std::size_t hidden_layers, double target) {
  if (hidden_layers == 0) return 0;
  std::size_t best = 1;
  double best_gap = std::abs(
      static_cast<double>(mlp_count(inputs, outputs, hidden_layers, 1)) -
      target);
  for (std::size_t w = 2;; ++w) {
    const double count =
        static_cast<double>(mlp_count(inputs, outputs, hidden_layers, w));
    const double gap = std::abs(count - target);
    if (gap < best_gap) {
      best = w;
      best_gap = gap;
    }
    if (count > target) break;
  }
  return best;
}

// ---------------------------------------------------------------------------

DenseActor::DenseActor(DenseNet net) : net_(std::move(net)) {}

std::size_t DenseActor::parameter_count() const {
  return net_.parameter_count();
}
std::size_t DenseActor::action_count() const { return net_.output_size(); }

std::vector<double> DenseActor::logits(std::span<const double> observation,
                                       std::span<const double> params) const {
  return net_.forward(params, observation);
}

std::vector<double> DenseActor::logits_vjp(
    std::span<const double> observation, std::span<const double> params,
    std::span<const double> cotangent) const {
  return net_.backward(params, observation, cotangent);
}

std::vector<double> DenseActor::initial_parameters(Rng& rng) const {
  return net_.initial_parameters(rng);
}

std::string DenseActor::describe() const {
  return "dense_actor " + net_.describe() + "\n";
}

DenseCritic::DenseCritic(DenseNet net) : net_(std::move(net)) {
  if (net_.output_size() != 1) {
    throw ConfigError("critic network must have a single output");
  }
}

std::size_t DenseCritic::parameter_count() const {
  return net_.parameter_count();
}

double DenseCritic::value(std::span<const double> state,
                          std::span<const double> params) const {
  return net_.forward(params, state)[0];
}

std::vector<double> DenseCritic::value_gradient(
    std::span<const double> state, std::span<const double> params) const {
  const double one = 1.0;
  return net_.backward(params, state, std::span<const double>(&one, 1));
}

std::vector<double> DenseCritic::initial_parameters(Rng& rng) const {
  return net_.initial_parameters(rng);
}

std::string DenseCritic::describe() const {
  return "dense_critic " + net_.describe() + "\n";
}

UniformPolicy::UniformPolicy(std::size_t actions) : actions_(actions) {
  if (actions_ == 0) throw ConfigError("uniform policy needs actions");
}

std::vector<double> UniformPolicy::logits(std::span<const double>,
                                          std::span<const double>) const {
  return std::vector<double>(actions_, 0.0);
}

std::vector<double> UniformPolicy::logits_vjp(std::span<const double>,
                                              std::span<const double>,
                                              std::span<const double>) const {
  return {};
}

std::vector<double> UniformPolicy::initial_parameters(Rng&) const {
  return {};
}

std::string UniformPolicy::describe() const {
  return "uniform_policy actions " + std::to_string(actions_) + "\n";
}

// ---------------------------------------------------------------------------

double default_budget(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Comp1Hybrid:
    case BaselineKind::Comp2Small:
      return 110.0;
    case BaselineKind::Comp3Large:
      return 40000.0;
    case BaselineKind::Comp4Random:
      return 0.0;
  }
  return 0.0;
}

std::string_view scheme_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Comp1Hybrid:
      return "comp1";
    case BaselineKind::Comp2Small:
      return "comp2";
    case BaselineKind::Comp3Large:
      return "comp3";
    case BaselineKind::Comp4Random:
      return "comp4";
  }
  return "?";
}

BaselineKind parse_kind(std::string_view name) {
  if (name == "comp1" || name == "comp1_hybrid") return BaselineKind::Comp1Hybrid;
  if (name == "comp2" || name == "comp2_classical_small") {
    return BaselineKind::Comp2Small;
  }
  if (name == "comp3" || name == "comp3_classical_large") {
    return BaselineKind::Comp3Large;
  }
  if (name == "comp4" || name == "comp4_random") return BaselineKind::Comp4Random;
  throw ConfigError("unknown baseline scheme '" + std::string(name) + "'");
}

namespace {

DenseNet sized(std::size_t inputs, std::size_t outputs,
               std::size_t hidden_layers, double target, Activation hidden) {
  const std::size_t width =
      size_hidden_width(inputs, outputs, hidden_layers, target);
  return make_mlp(inputs, outputs, hidden_layers, width, hidden);
}

void check_budget(const Scheme& s, double budget) {
  double total = static_cast<double>(s.actor->parameter_count());
  if (s.critic) total += static_cast<double>(s.critic->parameter_count());
  if (std::abs(total - budget) > 0.1 * budget) {
    throw ConfigError(std::string(s.name) + ": closest sizing has " +
                      std::to_string(static_cast<long>(total)) +
                      " parameters, outside 10% of the budget " +
                      std::to_string(static_cast<long>(budget)));
  }
}

}  // namespace

Scheme build_baseline(const BaselineSpec& spec,
                      const env::FactoryConfig& env_config,
                      const qmac::TrainConfig& train_config) {
  env_config.validate();
  const auto obs = static_cast<std::size_t>(env_config.observation_size());
  const auto state = static_cast<std::size_t>(env_config.state_size());
  const auto actions = static_cast<std::size_t>(env_config.action_count());
  const double budget = spec.budget > 0.0 ? spec.budget : default_budget(spec.kind);

  Scheme s;
  s.name = std::string(scheme_name(spec.kind));
  switch (spec.kind) {
    case BaselineKind::Comp4Random:
      s.actor = std::make_shared<UniformPolicy>(actions);
      s.greedy_eval = false;
      return s;
    case BaselineKind::Comp1Hybrid: {
      auto proposed = qmac::proposed_scheme(env_config, train_config);
      s.actor = proposed.actor;
      const double rest =
          budget - static_cast<double>(s.actor->parameter_count());
      if (rest < 1.0) {
        throw ConfigError("comp1: budget leaves no room for the critic");
      }
      s.critic = std::make_shared<DenseCritic>(
          sized(state, 1, 1, rest, Activation::Tanh));
      break;
    }
    case BaselineKind::Comp2Small:
    case BaselineKind::Comp3Large: {
      const std::size_t layers = spec.kind == BaselineKind::Comp2Small ? 1 : 2;
      s.actor = std::make_shared<DenseActor>(
          sized(obs, actions, layers, budget / 2.0, Activation::Relu));
      s.critic = std::make_shared<DenseCritic>(
          sized(state, 1, layers, budget / 2.0, Activation::Tanh));
      break;
    }
  }
  check_budget(s, budget);
  return s;
}

env::AgentAction random_walk_policy(std::span<const double>, Rng& rng,
                                    int action_count) {
  if (action_count < 1) throw ConfigError("action_count must be >= 1");
  return {static_cast<int>(
      uniform_index(rng, static_cast<std::uint64_t>(action_count)))};
}

}  // namespace qmarl::baselines
