#include "qmarl/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qmarl/baselines.hpp"
#include "qmarl/errors.hpp"

namespace qmarl::bench {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string key_error(std::string_view key, std::string_view value,
                      std::string_view expected) {
  return "invalid value '" + std::string(value) + "' for " + std::string(key) +
         " (expected " + std::string(expected) + ")";
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError(key_error(key, value, "a number"));
  }
  return out;
}

long long parse_int(std::string_view key, std::string_view value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key_error(key, value, "an integer"));
  }
  return out;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key_error(key, value, "an unsigned integer"));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key_error(key, value, "true or false"));
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < value.size()) {
    while (i < value.size() && (value[i] == ',' || value[i] == ' ' ||
                                value[i] == '\t')) {
      ++i;
    }
    std::size_t j = i;
    while (j < value.size() && value[j] != ',' && value[j] != ' ' &&
           value[j] != '\t') {
      ++j;
    }
    if (j > i) out.push_back(value.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<double> parse_doubles(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (auto item : split_list(value)) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError(key_error(key, value, "a list of numbers"));
  return out;
}

std::vector<std::uint64_t> parse_seeds(std::string_view key,
                                       std::string_view value) {
  std::vector<std::uint64_t> out;
  for (auto item : split_list(value)) out.push_back(parse_u64(key, item));
  if (out.empty()) throw ConfigError(key_error(key, value, "a list of seeds"));
  return out;
}

int to_int(std::string_view key, std::string_view value) {
  const long long v = parse_int(key, value);
  if (v < INT32_MIN || v > INT32_MAX) {
    throw ConfigError(key_error(key, value, "a 32-bit integer"));
  }
  return static_cast<int>(v);
}

// Shortest text that reads back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "scheme",
      "seeds",
      "out",
      "scenario",
      "budget",
      "robustness.iterations",
      "encode.iterations",
      "encode.learning_rate",
      "encode.seeds",
      "encode.bit_angle",
      "env.num_agents",
      "env.num_sites",
      "env.warehouse_capacity",
      "env.amr_capacity",
      "env.episode_length",
      "env.lcd_unit_weight",
      "env.precision_catalog",
      "env.quality_delay",
      "env.weight_delay",
      "env.weight_amr_balance",
      "env.weight_warehouse_balance",
      "env.arrival_cap",
      "env.warehouse_outflow",
      "env.quantity_levels",
      "env.minutes_per_step",
      "env.normalize_balance",
      "train.actor_lr",
      "train.critic_lr",
      "train.weight_decay",
      "train.gamma",
      "train.beta_actor",
      "train.beta_critic",
      "train.target_update_period",
      "train.max_epochs",
      "train.eval_episodes",
      "train.init_scale",
  };
  return keys;
}

void apply_setting(ExperimentConfig& c, std::string_view key,
                   std::string_view value) {
  value = trim(value);
  auto& e = c.env;
  auto& t = c.train;
  if (key == "scheme") {
    if (value.empty()) throw ConfigError("scheme must not be empty");
    c.scheme = std::string(value);
  } else if (key == "seeds") {
    c.seeds = parse_seeds(key, value);
  } else if (key == "out") {
    c.out = fs::path(std::string(value));
  } else if (key == "scenario") {
    const fs::path path{std::string(value)};
    if (!fs::exists(path)) {
      throw ConfigError("scenario file not found: " + path.string());
    }
    e.schedule = env::PrecisionSchedule::load(path);
    c.scenario = path;
  } else if (key == "budget") {
    c.budget = parse_double(key, value);
  } else if (key == "robustness.iterations") {
    c.robustness_iterations = to_int(key, value);
  } else if (key == "encode.iterations") {
    c.encode.iterations = to_int(key, value);
  } else if (key == "encode.learning_rate") {
    c.encode.learning_rate = parse_double(key, value);
  } else if (key == "encode.seeds") {
    c.encode.seeds = parse_seeds(key, value);
  } else if (key == "encode.bit_angle") {
    c.encode.bit_angle = parse_double(key, value);
  } else if (key == "env.num_agents") {
    e.num_agents = to_int(key, value);
  } else if (key == "env.num_sites") {
    e.num_sites = to_int(key, value);
  } else if (key == "env.warehouse_capacity") {
    e.warehouse_capacity = parse_double(key, value);
  } else if (key == "env.amr_capacity") {
    e.amr_capacity = parse_double(key, value);
  } else if (key == "env.episode_length") {
    e.episode_length = to_int(key, value);
  } else if (key == "env.lcd_unit_weight") {
    e.lcd_unit_weight = parse_double(key, value);
  } else if (key == "env.precision_catalog") {
    e.precision_catalog = parse_doubles(key, value);
  } else if (key == "env.quality_delay") {
    e.quality_delay = to_int(key, value);
  } else if (key == "env.weight_delay") {
    e.weights.delay = parse_double(key, value);
  } else if (key == "env.weight_amr_balance") {
    e.weights.amr_balance = parse_double(key, value);
  } else if (key == "env.weight_warehouse_balance") {
    e.weights.warehouse_balance = parse_double(key, value);
  } else if (key == "env.arrival_cap") {
    e.arrival_cap = parse_double(key, value);
  } else if (key == "env.warehouse_outflow") {
    e.warehouse_outflow = parse_double(key, value);
  } else if (key == "env.quantity_levels") {
    e.quantity_levels = parse_doubles(key, value);
  } else if (key == "env.minutes_per_step") {
    e.minutes_per_step = parse_double(key, value);
  } else if (key == "env.normalize_balance") {
    e.normalize_balance = parse_bool(key, value);
  } else if (key == "train.actor_lr") {
    t.actor_lr = parse_double(key, value);
  } else if (key == "train.critic_lr") {
    t.critic_lr = parse_double(key, value);
  } else if (key == "train.weight_decay") {
    t.weight_decay = parse_double(key, value);
  } else if (key == "train.gamma") {
    t.gamma = parse_double(key, value);
  } else if (key == "train.beta_actor") {
    t.beta_actor = parse_double(key, value);
  } else if (key == "train.beta_critic") {
    t.beta_critic = parse_double(key, value);
  } else if (key == "train.target_update_period") {
    t.target_update_period = to_int(key, value);
  } else if (key == "train.max_epochs") {
    t.max_epochs = to_int(key, value);
  } else if (key == "train.eval_episodes") {
    t.eval_episodes = to_int(key, value);
  } else if (key == "train.init_scale") {
    t.init_scale = parse_double(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (scenario && !fs::exists(*scenario)) {
    throw ConfigError("scenario file not found: " + scenario->string());
  }
  if (robustness_iterations < 1) {
    throw ConfigError("robustness.iterations must be >= 1");
  }
  if (encode.iterations < 0) throw ConfigError("encode.iterations must be >= 0");
  if (!(encode.learning_rate > 0.0)) {
    throw ConfigError("encode.learning_rate must be > 0");
  }
  if (encode.seeds.empty()) throw ConfigError("encode.seeds is empty");
  if (!std::isfinite(encode.bit_angle)) {
    throw ConfigError("encode.bit_angle must be finite");
  }
  if (budget < 0.0) throw ConfigError("budget must be >= 0");
  env.validate();
  train.validate();
  // Builds the scheme to surface unknown names and sizing errors early.
  make_scheme(scheme, env, train, budget);
}

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  ExperimentConfig config;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    std::string value(trim(line.substr(eq + 1)));
    if ((key == "scenario" || key == "out") && !base_dir.empty() &&
        fs::path(value).is_relative()) {
      value = (base_dir / value).lexically_normal().string();
    }
    try {
      apply_setting(config, key, value);
    } catch (const Error& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Scheme make_scheme(std::string_view name, const env::FactoryConfig& env_config,
                   const qmac::TrainConfig& train_config, double budget) {
  if (name == "proposed") return qmac::proposed_scheme(env_config, train_config);
  baselines::BaselineSpec spec;
  spec.kind = baselines::parse_kind(name);
  spec.budget = budget;
  return baselines::build_baseline(spec, env_config, train_config);
}

// ---------------------------------------------------------------------------
// Snapshots

Snapshot make_snapshot(const Scheme& scheme, std::uint64_t seed,
                       const qmac::TrainingResult& result) {
  Snapshot s;
  s.scheme = scheme.name;
  s.seed = seed;
  s.actor_description = scheme.actor->describe();
  s.actor_params = result.actor_params;
  if (scheme.critic) {
    s.critic_description = scheme.critic->describe();
    s.critic_params = result.critic_params;
  }
  return s;
}

void write_snapshot(const fs::path& path, const Snapshot& snapshot) {
  nlohmann::ordered_json j;
  j["scheme"] = snapshot.scheme;
  j["seed"] = snapshot.seed;
  j["actor"] = {{"description", snapshot.actor_description},
                {"params", snapshot.actor_params}};
  j["critic"] = {{"description", snapshot.critic_description},
                 {"params", snapshot.critic_params}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write snapshot " + path.string());
  out << j.dump(1) << '\n';
}

Snapshot read_snapshot(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open snapshot " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    Snapshot s;
    s.scheme = j.at("scheme").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.actor_description = j.at("actor").at("description").get<std::string>();
    s.actor_params = j.at("actor").at("params").get<std::vector<double>>();
    s.critic_description = j.at("critic").at("description").get<std::string>();
    s.critic_params = j.at("critic").at("params").get<std::vector<double>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void check_snapshot(const Snapshot& snapshot, const Scheme& scheme) {
  if (snapshot.scheme != scheme.name) {
    throw ConfigError("snapshot is for scheme '" + snapshot.scheme +
                      "', expected '" + scheme.name + "'");
  }
  if (snapshot.actor_description != scheme.actor->describe() ||
      snapshot.actor_params.size() != scheme.actor->parameter_count()) {
    throw ConfigError("snapshot actor layout does not match the configuration");
  }
}

fs::path metrics_path(const fs::path& out, std::string_view scheme,
                      std::uint64_t seed) {
  return out / ("metrics_" + std::string(scheme) + "_seed" +
                std::to_string(seed) + ".jsonl");
}

fs::path snapshot_path(const fs::path& out, std::string_view scheme,
                       std::uint64_t seed) {
  return out / ("snapshot_" + std::string(scheme) + "_seed" +
                std::to_string(seed) + ".json");
}

// ---------------------------------------------------------------------------
// Experiments

ExperimentOutputs run_experiment(const ExperimentConfig& config,
                                 std::ostream* log) {
  config.validate();
  fs::create_directories(config.out);
  ExperimentOutputs outputs;
  const Scheme scheme =
      make_scheme(config.scheme, config.env, config.train, config.budget);
  const int every = std::max(1, config.train.max_epochs / 10);

  for (std::uint64_t seed : config.seeds) {
    qmac::TrainConfig train = config.train;
    train.seed = seed;
    qmac::EpochCallback progress;
    if (log) {
      progress = [&](const MetricsRecord& r) {
        if ((r.epoch + 1) % every == 0) {
          *log << scheme.name << " seed " << seed << " epoch " << r.epoch + 1
               << "/" << train.max_epochs << " reward " << r.total_reward
               << '\n';
        }
      };
    }
    auto result = qmac::train(config.env, train, scheme, progress);
    auto records = std::move(result.records);
    auto evals = qmac::evaluate(config.env, scheme, result.actor_params,
                                train.eval_episodes, seed);
    records.insert(records.end(), evals.begin(), evals.end());

    const auto mpath = metrics_path(config.out, scheme.name, seed);
    write_metrics(mpath, records);
    outputs.metrics_files.push_back(mpath);
    if (scheme.trainable()) {
      const auto spath = snapshot_path(config.out, scheme.name, seed);
      write_snapshot(spath, make_snapshot(scheme, seed, result));
      outputs.snapshots.push_back(spath);
    }
    if (log && !evals.empty()) {
      double mean = 0.0;
      for (const auto& r : evals) mean += r.total_reward;
      *log << scheme.name << " seed " << seed << " eval reward "
           << mean / static_cast<double>(evals.size()) << '\n';
    }
  }
  return outputs;
}

namespace {

Scheme scheme_for_snapshot(const ExperimentConfig& config,
                           const Snapshot& snapshot) {
  Scheme scheme =
      make_scheme(snapshot.scheme, config.env, config.train, config.budget);
  check_snapshot(snapshot, scheme);
  return scheme;
}

}  // namespace

std::vector<MetricsRecord> evaluate_snapshot(const ExperimentConfig& config,
                                             const Snapshot& snapshot,
                                             std::uint64_t seed) {
  config.env.validate();
  const Scheme scheme = scheme_for_snapshot(config, snapshot);
  return qmac::evaluate(config.env, scheme, snapshot.actor_params,
                        config.train.eval_episodes, seed);
}

// ---------------------------------------------------------------------------
// Encoding benchmark

std::string_view encoding_name(Encoding e) {
  switch (e) {
    case Encoding::OneVariable:
      return "1-var";
    case Encoding::TwoVariable:
      return "2-var";
    case Encoding::FourVariable:
      return "4-var";
  }
  return "?";
}

double encoding_target(const std::array<int, 4>& bits) {
  double y = 0.0;
  for (int i = 0; i < 4; ++i) y += bits[i] * std::ldexp(1.0, -i);
  return y;
}

namespace {

constexpr double kTargetScale = 1.875;

int encoding_qubits(Encoding e) {
  switch (e) {
    case Encoding::OneVariable:
      return 4;
    case Encoding::TwoVariable:
      return 2;
    case Encoding::FourVariable:
      return 1;
  }
  return 1;
}

vqc::CircuitLayout encoding_layout(Encoding e, int budget) {
  if (budget < 1) throw ConfigError("encoding budget must be >= 1");
  const int nq = encoding_qubits(e);
  const vqc::Block block = vqc::full_block(nq);
  const int per_block = static_cast<int>(block.rotations.size());
  std::vector<vqc::Block> blocks(static_cast<std::size_t>(budget / per_block),
                                 block);
  std::vector<vqc::RotationSlot> trailing(
      block.rotations.begin(), block.rotations.begin() + budget % per_block);
  return vqc::CircuitLayout(nq, std::move(blocks), std::move(trailing), {0});
}

std::array<int, 4> pattern(int k) {
  return {(k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1};
}

}  // namespace

EncodingRegressor::EncodingRegressor(Encoding encoding, int budget,
                                     double bit_angle)
    : encoding_(encoding),
      layout_(encoding_layout(encoding, budget)),
      bit_angle_(bit_angle) {}

qsim::StateVector EncodingRegressor::encode(
    const std::array<int, 4>& bits) const {
  std::vector<double> angles(4);
  for (int i = 0; i < 4; ++i) angles[i] = bits[i] * bit_angle_;
  switch (encoding_) {
    case Encoding::OneVariable:
      return vqc::encode_actor_observation(angles, 4);
    case Encoding::TwoVariable:
      return vqc::encode_critic_state(angles, 2);
    case Encoding::FourVariable: {
      qsim::StateVector s(1);
      s.apply(qsim::GateSpec::ry(0, angles[3]));
      s.apply(qsim::GateSpec::ry(0, angles[2]));
      s.apply(qsim::GateSpec::rz(0, angles[1]));
      s.apply(qsim::GateSpec::rz(0, angles[0]));
      return s;
    }
  }
  throw ContractError("unknown encoding");
}

double EncodingRegressor::predict(const std::array<int, 4>& bits,
                                  std::span<const double> params) const {
  const double z = vqc::evaluate_observables(layout_, params, encode(bits))[0];
  return kTargetScale * (1.0 - z) / 2.0;
}

double EncodingRegressor::loss(std::span<const double> params) const {
  double total = 0.0;
  for (int k = 0; k < 16; ++k) {
    const auto bits = pattern(k);
    const double err = predict(bits, params) - encoding_target(bits);
    total += err * err;
  }
  return total / 16.0;
}

std::vector<double> EncodingRegressor::loss_gradient(
    std::span<const double> params) const {
  std::vector<double> grad(parameter_count(), 0.0);
  for (int k = 0; k < 16; ++k) {
    const auto bits = pattern(k);
    const auto encoded = encode(bits);
    const double z = vqc::evaluate_observables(layout_, params, encoded)[0];
    const double err = kTargetScale * (1.0 - z) / 2.0 - encoding_target(bits);
    // d(err^2 / 16) / dz
    const double upstream = 2.0 * err * (-kTargetScale / 2.0) / 16.0;
    const auto g = vqc::parameter_shift_gradient(
        layout_, params, encoded, std::span<const double>(&upstream, 1));
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
  }
  return grad;
}

EncodingRun train_encoding(Encoding encoding, int budget, std::uint64_t seed,
                           int iterations, double learning_rate,
                           double bit_angle) {
  const EncodingRegressor model(encoding, budget, bit_angle);
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(encoding)));
  std::vector<double> params(model.parameter_count());
  for (double& p : params) p = uniform(rng, -std::numbers::pi, std::numbers::pi);
  EncodingRun run{encoding, seed, {}};
  qmac::AdamState opt;
  for (int it = 0; it < iterations; ++it) {
    run.mse.push_back(model.loss(params));
    qmac::adam_step(params, model.loss_gradient(params), opt, learning_rate,
                    0.0);
  }
  run.mse.push_back(model.loss(params));
  return run;
}

std::vector<EncodingRun> encoding_benchmark(int budget,
                                            const EncodeBenchConfig& config) {
  if (budget < 1) throw ConfigError("encoding budget must be >= 1");
  std::vector<EncodingRun> runs;
  for (std::uint64_t seed : config.seeds) {
    for (Encoding e : kEncodings) {
      runs.push_back(train_encoding(e, budget, seed, config.iterations,
                                    config.learning_rate, config.bit_angle));
    }
  }
  return runs;
}

// ---------------------------------------------------------------------------
// Robustness scenario

void check_schedule_covers(const env::FactoryConfig& config) {
  const double horizon = config.episode_length * config.minutes_per_step;
  const auto& phases = config.schedule.phases();
  if (phases.empty()) throw ConfigError("precision schedule is empty");
  for (std::size_t k = 0; k < phases.size(); ++k) {
    if (phases[k].start_minute >= horizon) {
      std::ostringstream os;
      os << "phase " << k + 1 << " starts at minute " << phases[k].start_minute
         << ", after the episode ends at minute " << horizon;
      throw ConfigError(os.str());
    }
  }
}

std::vector<PrecisionPoint> robustness_scenario(const ExperimentConfig& config,
                                                const Snapshot& snapshot,
                                                std::uint64_t seed,
                                                int iterations) {
  const auto& env_config = config.env;
  env_config.validate();
  check_schedule_covers(env_config);
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  const Scheme scheme = scheme_for_snapshot(config, snapshot);
  const auto mode = scheme.greedy_eval ? qmac::SelectMode::Greedy
                                       : qmac::SelectMode::Sample;
  const auto steps = static_cast<std::size_t>(env_config.episode_length);
  std::vector<PrecisionPoint> series(steps);
  Rng policy_rng(mix_seed(seed, 0x726F6275));

  for (int i = 0; i < iterations; ++i) {
    Rng env_rng(qmac::eval_episode_seed(seed, i));
    auto [state, obs] = env::reset(env_config, env_rng);
    for (std::size_t t = 0; t < steps; ++t) {
      std::vector<env::AgentAction> actions;
      for (const auto& o : obs) {
        const auto dist =
            qmac::policy_distribution(*scheme.actor, o, snapshot.actor_params);
        actions.push_back(qmac::select_action(dist, mode, policy_rng));
      }
      auto outcome = env::step(env_config, state, actions, env_rng);
      const auto& q = outcome.metrics.precision_utility;
      series[t].phase = outcome.next.phase;
      series[t].mean_precision +=
          std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
      state = std::move(outcome.next);
      obs = std::move(outcome.observations);
    }
  }
  for (std::size_t t = 0; t < steps; ++t) {
    series[t].step = static_cast<int>(t);
    series[t].minute = static_cast<double>(t) * env_config.minutes_per_step;
    series[t].mean_precision /= iterations;
  }
  return series;
}

void write_precision_series(const fs::path& path,
                            const std::vector<PrecisionPoint>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "step,minute,phase,mean_precision\n";
  for (const auto& p : series) {
    out << p.step << ',' << format_double(p.minute) << ',' << p.phase + 1 << ','
        << format_double(p.mean_precision) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Reports

std::vector<SummaryRow> summarize(const std::vector<fs::path>& files) {
  if (files.empty()) throw ConfigError("report needs at least one metrics file");
  const std::size_t cols = metric_columns().size();
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::vector<std::vector<double>>> per_file_means;
  for (const auto& file : files) {
    std::map<Key, std::pair<std::vector<double>, int>> sums;
    for (const auto& r : read_metrics(file)) {
      auto& [sum, n] = sums[{r.scheme, r.kind}];
      if (sum.empty()) sum.assign(cols, 0.0);
      const auto values = metric_values(r);
      for (std::size_t c = 0; c < cols; ++c) sum[c] += values[c];
      ++n;
    }
    for (auto& [key, acc] : sums) {
      auto& [sum, n] = acc;
      for (double& v : sum) v /= n;
      per_file_means[key].push_back(sum);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, means] : per_file_means) {
    SummaryRow row;
    row.scheme = key.first;
    row.kind = key.second;
    row.files = static_cast<int>(means.size());
    row.mean.assign(cols, 0.0);
    row.std.assign(cols, 0.0);
    for (const auto& m : means) {
      for (std::size_t c = 0; c < cols; ++c) row.mean[c] += m[c];
    }
    for (double& v : row.mean) v /= row.files;
    for (const auto& m : means) {
      for (std::size_t c = 0; c < cols; ++c) {
        row.std[c] += (m[c] - row.mean[c]) * (m[c] - row.mean[c]);
      }
    }
    for (double& v : row.std) v = std::sqrt(v / row.files);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "scheme,kind,files";
  for (const auto& c : metric_columns()) out << ',' << c << "_mean," << c << "_std";
  out << '\n';
  for (const auto& row : rows) {
    out << row.scheme << ',' << row.kind << ',' << row.files;
    for (std::size_t c = 0; c < row.mean.size(); ++c) {
      out << ',' << format_double(row.mean[c]) << ','
          << format_double(row.std[c]);
    }
    out << '\n';
  }
}

void write_summary_table(std::ostream& out,
                         const std::vector<SummaryRow>& rows) {
  // Column order of metric_columns(): reward, precision, time, amr load,
  // warehouse load, amr over, warehouse over, amr under, warehouse under.
  const std::vector<std::pair<const char*, std::size_t>> shown{
      {"AMR load", 3},       {"WH load", 4},       {"AMR over", 5},
      {"WH over", 6},        {"AMR under", 7},     {"WH under", 8},
      {"Precision %", 1},    {"Time min", 2},      {"Reward", 0}};
  out << std::left << std::setw(10) << "Scheme";
  for (const auto& [name, idx] : shown) out << std::right << std::setw(13) << name;
  out << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& row : rows) {
    if (row.kind != "eval") continue;
    out << std::left << std::setw(10) << row.scheme;
    for (const auto& [name, idx] : shown) {
      out << std::right << std::setw(13) << row.mean[idx];
    }
    out << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace qmarl::bench
