#include "qmarl/factory_env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qmarl/errors.hpp"

namespace qmarl::env {

// ---------------------------------------------------------------------------
// Precision schedule

PrecisionSchedule::PrecisionSchedule(std::vector<PrecisionPhase> phases)
    : phases_(std::move(phases)) {
  if (phases_.empty()) throw ConfigError("precision schedule has no phases");
  if (phases_.front().start_minute != 0.0) {
    throw ConfigError("precision schedule must start at minute 0");
  }
  for (std::size_t i = 0; i < phases_.size(); ++i) {
    const auto& p = phases_[i];
    if (!std::isfinite(p.start_minute)) {
      throw ConfigError("phase start is not finite");
    }
    if (i > 0 && p.start_minute <= phases_[i - 1].start_minute) {
      throw ConfigError("phase starts must strictly increase");
    }
    if (p.mode == PrecisionMode::Fixed && !(p.value > 0.0 && p.value <= 1.0)) {
      throw ConfigError("phase precision must lie in (0, 1]");
    }
  }
}

PrecisionSchedule PrecisionSchedule::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<PrecisionPhase> phases;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream ls(line);
    std::string start, prec, extra;
    if (!(ls >> start)) continue;
    if (!(ls >> prec) || (ls >> extra)) {
      throw ParseError("scenario line " + std::to_string(line_no) +
                       ": expected '<start_minute> <precision>'");
    }
    PrecisionPhase phase;
    try {
      std::size_t used = 0;
      phase.start_minute = std::stod(start, &used);
      if (used != start.size()) throw std::invalid_argument(start);
      if (prec == "catalog" || prec == "random") {
        phase.mode = PrecisionMode::Catalog;
      } else if (prec == "uniform") {
        phase.mode = PrecisionMode::Uniform;
      } else {
        phase.mode = PrecisionMode::Fixed;
        phase.value = std::stod(prec, &used);
        if (used != prec.size()) throw std::invalid_argument(prec);
      }
    } catch (const std::logic_error&) {
      throw ParseError("scenario line " + std::to_string(line_no) +
                       ": malformed number");
    }
    phases.push_back(phase);
  }
  if (phases.empty()) throw ConfigError("scenario defines no phases");
  return PrecisionSchedule(std::move(phases));
}

PrecisionSchedule PrecisionSchedule::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

PrecisionSchedule PrecisionSchedule::catalog_random() {
  return PrecisionSchedule({{0.0, PrecisionMode::Catalog, 0.0}});
}

PrecisionSchedule PrecisionSchedule::four_phase() {
  return PrecisionSchedule({{0.0, PrecisionMode::Catalog, 0.0},
                            {30.0, PrecisionMode::Fixed, 0.619},
                            {40.0, PrecisionMode::Fixed, 0.958},
                            {50.0, PrecisionMode::Fixed, 0.971}});
}

std::size_t PrecisionSchedule::phase_at(double minute) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < phases_.size(); ++i) {
    if (phases_[i].start_minute <= minute) idx = i;
  }
  return idx;
}

std::string PrecisionSchedule::describe() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& p : phases_) {
    os << p.start_minute << ' ';
    switch (p.mode) {
      case PrecisionMode::Catalog: os << "catalog"; break;
      case PrecisionMode::Uniform: os << "uniform"; break;
      case PrecisionMode::Fixed: os << p.value; break;
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Configuration and actions

void FactoryConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (num_agents < 1) fail("num_agents must be >= 1");
  if (num_agents > (1 << kIndexBits)) {
    fail("num_agents must fit in " + std::to_string(kIndexBits) +
         " index bits");
  }
  if (num_sites < 1) fail("num_sites must be >= 1");
  if (!(warehouse_capacity > 0.0)) fail("warehouse_capacity must be > 0");
  if (!(amr_capacity > 0.0)) fail("amr_capacity must be > 0");
  if (episode_length < 1) fail("episode_length must be >= 1");
  if (!(lcd_unit_weight > 0.0)) fail("lcd_unit_weight must be > 0");
  if (precision_catalog.empty()) fail("precision_catalog is empty");
  for (double p : precision_catalog) {
    if (!(p > 0.0 && p <= 1.0)) fail("precision entries must lie in (0, 1]");
  }
  if (quality_delay < 0) fail("quality_delay must be >= 0");
  if (!(arrival_cap >= 0.0)) fail("arrival_cap must be >= 0");
  if (!(warehouse_outflow >= 0.0)) fail("warehouse_outflow must be >= 0");
  if (quantity_levels.empty()) fail("quantity_levels is empty");
  for (double q : quantity_levels) {
    if (!(q >= 0.0)) fail("quantity levels must be >= 0");
  }
  if (!(minutes_per_step > 0.0)) fail("minutes_per_step must be > 0");
  if (weights.delay < 0 || weights.amr_balance < 0 ||
      weights.warehouse_balance < 0) {
    fail("reward weights must be non-negative");
  }
}

DecodedAction decode_action(const FactoryConfig& config, AgentAction action) {
  const int n_levels = static_cast<int>(config.quantity_levels.size());
  if (action.index < 0 || action.index >= config.action_count()) {
    throw ContractError("action index " + std::to_string(action.index) +
                        " outside catalog of " +
                        std::to_string(config.action_count()));
  }
  if (action.index == config.action_count() - 1) {
    return {0, 0.0, true};
  }
  return {action.index / n_levels,
          config.quantity_levels[action.index % n_levels], false};
}

// ---------------------------------------------------------------------------
// Utilities

double load_update(double current, double delivered, double received,
                   double cap) {
  return std::min(cap, std::max(current - delivered + received, 0.0));
}

double precision_utility(double tp, double fp) {
  const double total = tp + fp;
  if (total <= 0.0) return 1.0;
  return tp / total;
}

double delay_utility(int quality_flag, int quality_delay) {
  return -(1.0 + static_cast<double>(quality_delay) * quality_flag);
}

double balance_utility(double residual, double cap, bool hit_floor,
                       bool hit_ceiling) {
  double magnitude = 0.0;
  if (hit_floor) magnitude += residual;
  if (hit_ceiling) magnitude += std::abs(cap - residual);
  return -magnitude;
}

double reward(const StepUtilities& u, const RewardWeights& w) {
  double r = 0.0;
  for (std::size_t n = 0; n < u.precision.size(); ++n) {
    r += u.precision[n] + w.delay * u.delay[n] + w.amr_balance * u.amr_balance[n];
  }
  double site = 0.0;
  for (double v : u.warehouse_balance) site += v;
  return r + w.warehouse_balance * site;
}

// ---------------------------------------------------------------------------
// Dynamics

namespace {

double draw_precision(const FactoryConfig& config, const PrecisionPhase& phase,
                      Rng& rng) {
  switch (phase.mode) {
    case PrecisionMode::Fixed:
      return phase.value;
    case PrecisionMode::Catalog:
      return config.precision_catalog[uniform_index(
          rng, config.precision_catalog.size())];
    case PrecisionMode::Uniform: {
      const auto [lo, hi] = std::minmax_element(
          config.precision_catalog.begin(), config.precision_catalog.end());
      return uniform(rng, *lo, *hi);
    }
  }
  return 1.0;
}

void enter_phase(const FactoryConfig& config, FactoryState& state,
                 std::size_t phase, Rng& rng) {
  state.phase = phase;
  const auto& p = config.schedule.phases()[phase];
  for (auto& prec : state.input_precision) prec = draw_precision(config, p, rng);
}

}  // namespace

std::pair<FactoryState, std::vector<Observation>> reset(
    const FactoryConfig& config, Rng& rng) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.num_agents);
  const auto m = static_cast<std::size_t>(config.num_sites);
  FactoryState s;
  s.t = 0;
  s.warehouse_loads.assign(m, 0.0);
  s.amr_loads.assign(n, 0.0);
  s.true_positives.assign(n, 0.0);
  s.false_positives.assign(n, 0.0);
  s.pending_quality.assign(n, 0);
  s.last_delay_utilities.assign(n, delay_utility(0, config.quality_delay));
  s.input_precision.assign(n, 1.0);
  enter_phase(config, s, config.schedule.phase_at(0.0), rng);
  auto obs = observe_all(config, s);
  return {std::move(s), std::move(obs)};
}

std::pair<FactoryState, std::vector<Observation>> reset(
    const FactoryConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  return reset(config, rng);
}

Observation observe(const FactoryConfig& config, const FactoryState& state,
                    int agent) {
  Observation z;
  z.reserve(static_cast<std::size_t>(config.observation_size()));
  for (int b = 0; b < kIndexBits; ++b) z.push_back((agent >> b) & 1 ? 1.0 : 0.0);
  z.push_back(state.amr_loads[agent] / config.amr_capacity);
  for (double w : state.warehouse_loads) {
    z.push_back(w / config.warehouse_capacity);
  }
  return z;
}

std::vector<Observation> observe_all(const FactoryConfig& config,
                                     const FactoryState& state) {
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(config.num_agents));
  for (int n = 0; n < config.num_agents; ++n) {
    out.push_back(observe(config, state, n));
  }
  return out;
}

std::vector<double> state_vector(const FactoryConfig& config,
                                 const FactoryState& state) {
  std::vector<double> s;
  s.reserve(static_cast<std::size_t>(config.state_size()));
  const double tau = config.quality_delay;
  for (int n = 0; n < config.num_agents; ++n) {
    s.push_back(state.amr_loads[n] / config.amr_capacity);
    // u^d in [-(1 + tau), -1] mapped onto [0, 1].
    const double extra = -state.last_delay_utilities[n] - 1.0;
    s.push_back(tau > 0 ? std::clamp(extra / tau, 0.0, 1.0) : 0.0);
  }
  for (double w : state.warehouse_loads) {
    s.push_back(w / config.warehouse_capacity);
  }
  return s;
}

void apply_schedule(const FactoryConfig& config, FactoryState& state,
                    Rng& rng) {
  const std::size_t phase =
      config.schedule.phase_at(state.t * config.minutes_per_step);
  if (phase != state.phase) enter_phase(config, state, phase, rng);
}

std::vector<ArrivalDraw> sample_arrivals(const FactoryConfig& config,
                                         const FactoryState& state, Rng& rng) {
  std::vector<ArrivalDraw> out(static_cast<std::size_t>(config.num_agents));
  for (int n = 0; n < config.num_agents; ++n) {
    const double raw = uniform(rng, 0.0, config.arrival_cap);
    const double panels = std::floor(raw / config.lcd_unit_weight);
    const double expected_tp = panels * state.input_precision[n];
    double tp = std::floor(expected_tp);
    if (uniform01(rng) < expected_tp - tp) tp += 1.0;
    out[n] = {panels * config.lcd_unit_weight, tp, panels - tp};
  }
  return out;
}

StepOutcome transition(const FactoryConfig& config, const FactoryState& state,
                       std::span<const AgentAction> actions,
                       std::span<const ArrivalDraw> arrivals) {
  const auto n_agents = static_cast<std::size_t>(config.num_agents);
  const auto n_sites = static_cast<std::size_t>(config.num_sites);
  if (actions.size() != n_agents) {
    throw ContractError("expected " + std::to_string(n_agents) +
                        " actions, got " + std::to_string(actions.size()));
  }
  if (arrivals.size() != n_agents) {
    throw ContractError("arrival draws do not match agent count");
  }
  if (state.t >= config.episode_length) {
    throw ContractError("step called on a terminal state");
  }

  StepOutcome out;
  FactoryState& next = out.next;
  next = state;
  StepMetrics& mx = out.metrics;
  mx.precision_utility.assign(n_agents, 0.0);
  mx.delay_utility.assign(n_agents, 0.0);
  mx.amr_balance_utility.assign(n_agents, 0.0);
  mx.delivered.assign(n_agents, 0.0);
  mx.amr_overflow.assign(n_agents, 0.0);
  mx.amr_underflow.assign(n_agents, 0.0);
  mx.warehouse_balance_utility.assign(n_sites, 0.0);
  mx.warehouse_inflow.assign(n_sites, 0.0);
  mx.warehouse_overflow.assign(n_sites, 0.0);
  mx.warehouse_underflow.assign(n_sites, 0.0);

  const double unit = config.lcd_unit_weight;
  const double amr_cap = config.amr_capacity;

  for (std::size_t n = 0; n < n_agents; ++n) {
    double load = next.amr_loads[n];
    double tp = next.true_positives[n];
    double fp = next.false_positives[n];
    double demand = 0.0;
    int destination = 0;
    int quality_flag = 0;

    auto finish_quality_check = [&] {
      // Engineers remove every defective panel from the load.
      load = std::max(0.0, load - fp * unit);
      fp = 0.0;
    };

    const DecodedAction act = decode_action(config, actions[n]);
    if (next.pending_quality[n] > 0) {
      if (--next.pending_quality[n] == 0) finish_quality_check();
    } else if (act.quality) {
      quality_flag = 1;
      next.pending_quality[n] = config.quality_delay;
      if (config.quality_delay == 0) finish_quality_check();
    } else {
      demand = act.quantity;
      destination = act.destination;
    }

    const ArrivalDraw& in = arrivals[n];
    const double residual = load - demand + in.mass;
    const double clipped = load_update(load, demand, in.mass, amr_cap);
    const double delivered = std::min(demand, load + in.mass);
    const bool floor_hit = clipped == 0.0;
    const bool ceiling_hit = clipped == amr_cap;

    const double pool = load + in.mass;
    const double keep = pool > 0.0 ? clipped / pool : 0.0;
    next.true_positives[n] = (tp + in.true_positives) * keep;
    next.false_positives[n] = (fp + in.false_positives) * keep;
    next.amr_loads[n] = clipped;

    mx.delivered[n] = delivered;
    mx.warehouse_inflow[static_cast<std::size_t>(destination)] += delivered;
    mx.amr_underflow[n] = residual < 0.0 ? -residual : 0.0;
    mx.amr_overflow[n] = residual > amr_cap ? residual - amr_cap : 0.0;
    mx.amr_balance_utility[n] =
        balance_utility(std::abs(residual), amr_cap, floor_hit, ceiling_hit);
    mx.delay_utility[n] = delay_utility(quality_flag, config.quality_delay);
    mx.precision_utility[n] =
        precision_utility(next.true_positives[n], next.false_positives[n]);
    next.last_delay_utilities[n] = mx.delay_utility[n];
  }

  const double wh_cap = config.warehouse_capacity;
  for (std::size_t m = 0; m < n_sites; ++m) {
    const double load = next.warehouse_loads[m];
    const double inflow = mx.warehouse_inflow[m];
    const double residual = load - config.warehouse_outflow + inflow;
    const double clipped =
        load_update(load, config.warehouse_outflow, inflow, wh_cap);
    next.warehouse_loads[m] = clipped;
    mx.warehouse_underflow[m] = residual < 0.0 ? -residual : 0.0;
    mx.warehouse_overflow[m] = residual > wh_cap ? residual - wh_cap : 0.0;
    mx.warehouse_balance_utility[m] = balance_utility(
        std::abs(residual), wh_cap, clipped == 0.0, clipped == wh_cap);
  }

  StepUtilities u{mx.precision_utility, mx.delay_utility,
                  mx.amr_balance_utility, mx.warehouse_balance_utility};
  if (config.normalize_balance) {
    for (double& v : u.amr_balance) v /= amr_cap;
    for (double& v : u.warehouse_balance) v /= wh_cap;
  }
  out.reward = reward(u, config.weights);

  next.t = state.t + 1;
  out.done = next.t >= config.episode_length;
  out.observations = observe_all(config, next);
  return out;
}

StepOutcome step(const FactoryConfig& config, const FactoryState& state,
                 std::span<const AgentAction> actions, Rng& rng) {
  if (actions.size() != static_cast<std::size_t>(config.num_agents)) {
    throw ContractError("expected " + std::to_string(config.num_agents) +
                        " actions, got " + std::to_string(actions.size()));
  }
  if (state.t >= config.episode_length) {
    throw ContractError("step called on a terminal state");
  }
  FactoryState current = state;
  apply_schedule(config, current, rng);
  const auto arrivals = sample_arrivals(config, current, rng);
  return transition(config, current, actions, arrivals);
}

// ---------------------------------------------------------------------------
// Episode summaries

EpisodeAccumulator::EpisodeAccumulator(const FactoryConfig& config)
    : minutes_per_step_(config.minutes_per_step) {}

void EpisodeAccumulator::add(const StepOutcome& o) {
  ++steps_;
  sum_.total_reward += o.reward;
  const auto& m = o.metrics;
  double prec = 0.0;
  for (double v : m.precision_utility) prec += v;
  precision_sum_ += prec / static_cast<double>(m.precision_utility.size());
  for (double d : m.delay_utility) sum_.processing_time_min += -d * minutes_per_step_;
  double amr = 0.0;
  for (double v : o.next.amr_loads) amr += v;
  amr_load_sum_ += amr / static_cast<double>(o.next.amr_loads.size());
  double wh = 0.0;
  for (double v : o.next.warehouse_loads) wh += v;
  warehouse_load_sum_ += wh / static_cast<double>(o.next.warehouse_loads.size());
  for (double v : m.amr_overflow) sum_.amr_overflow += v;
  for (double v : m.amr_underflow) sum_.amr_underflow += v;
  for (double v : m.warehouse_overflow) sum_.warehouse_overflow += v;
  for (double v : m.warehouse_underflow) sum_.warehouse_underflow += v;
}

EpisodeSummary EpisodeAccumulator::summary() const {
  EpisodeSummary s = sum_;
  if (steps_ > 0) {
    s.precision_pct = 100.0 * precision_sum_ / steps_;
    s.avg_amr_load = amr_load_sum_ / steps_;
    s.avg_warehouse_load = warehouse_load_sum_ / steps_;
  }
  return s;
}

}  // namespace qmarl::env
