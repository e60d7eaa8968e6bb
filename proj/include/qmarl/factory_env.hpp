#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qmarl/random.hpp"

// Multi-AMR LCD smart factory: N mobile robots carry panels from their
// upstream process to M site warehouses, each of which feeds a downstream
// process with a fixed demand per step.

namespace qmarl::env {

inline constexpr int kIndexBits = 3;

struct RewardWeights {
  double delay = 0.1;
  double amr_balance = 1.0;
  double warehouse_balance = 10.0;
};

// How the incoming-load precision of a phase is chosen.
enum class PrecisionMode {
  Fixed,    // every agent gets `value`
  Catalog,  // each agent draws uniformly from the precision catalog
  Uniform,  // each agent draws from U[min catalog, max catalog]
};

struct PrecisionPhase {
  double start_minute = 0.0;
  PrecisionMode mode = PrecisionMode::Catalog;
  double value = 0.0;
};

// Piecewise-constant input precision over simulated minutes. The first phase
// must start at minute 0; starts strictly increase.
class PrecisionSchedule {
 public:
  PrecisionSchedule() = default;
  explicit PrecisionSchedule(std::vector<PrecisionPhase> phases);

  // Text format, one phase per line: `<start_minute> <precision>` where
  // precision is a fraction in (0, 1], `catalog` (alias `random`) or
  // `uniform`. '#' starts a comment.
  static PrecisionSchedule parse(std::string_view text);
  static PrecisionSchedule load(const std::filesystem::path& path);

  // Whole episode drawn from the catalog; the training environment.
  static PrecisionSchedule catalog_random();
  // Four phases over 60 minutes: catalog, 61.9 %, 95.8 %, 97.1 %.
  static PrecisionSchedule four_phase();

  const std::vector<PrecisionPhase>& phases() const { return phases_; }
  std::size_t phase_at(double minute) const;
  std::string describe() const;

 private:
  std::vector<PrecisionPhase> phases_{{0.0, PrecisionMode::Catalog, 0.0}};
};

struct FactoryConfig {
  int num_agents = 6;
  int num_sites = 2;
  double warehouse_capacity = 2000.0;  // kg
  double amr_capacity = 500.0;         // kg
  int episode_length = 30;             // steps
  double lcd_unit_weight = 6.0;        // kg per panel
  std::vector<double> precision_catalog{0.619, 0.958, 0.971};
  int quality_delay = 3;  // steps
  RewardWeights weights;
  double arrival_cap = 60.0;         // kg per step, per AMR
  double warehouse_outflow = 100.0;  // kg per step demanded at each site
  std::vector<double> quantity_levels{30.0, 90.0};  // kg
  double minutes_per_step = 2.0;
  // Express balance penalties in units of the entity's capacity instead of
  // kg inside the reward. Metrics always stay in kg.
  bool normalize_balance = true;
  PrecisionSchedule schedule;

  // Throws ConfigError.
  void validate() const;

  int observation_size() const { return kIndexBits + 1 + num_sites; }
  int state_size() const { return 2 * num_agents + num_sites; }
  int action_count() const {
    return num_sites * static_cast<int>(quantity_levels.size()) + 1;
  }
};

// Catalog index in [0, action_count). Indices enumerate
// (site, quantity) pairs site-major, and the last index requests a quality
// check.
struct AgentAction {
  int index = 0;
  bool operator==(const AgentAction&) const = default;
};

struct DecodedAction {
  int destination = 0;  // 0-based site
  double quantity = 0.0;
  bool quality = false;
};

DecodedAction decode_action(const FactoryConfig& config, AgentAction action);

struct FactoryState {
  int t = 0;
  std::size_t phase = 0;
  std::vector<double> warehouse_loads;
  std::vector<double> amr_loads;
  // Panel counts of the load currently on each AMR. Kept real-valued: loads
  // leave proportionally, so (tp + fp) * unit weight tracks the load mass.
  std::vector<double> true_positives;
  std::vector<double> false_positives;
  std::vector<int> pending_quality;
  std::vector<double> last_delay_utilities;
  std::vector<double> input_precision;

  bool operator==(const FactoryState&) const = default;
};

using Observation = std::vector<double>;

// Per-agent upstream delivery for one step.
struct ArrivalDraw {
  double mass = 0.0;  // kg, a whole number of panels
  double true_positives = 0.0;
  double false_positives = 0.0;
};

struct StepMetrics {
  std::vector<double> precision_utility;
  std::vector<double> delay_utility;
  std::vector<double> amr_balance_utility;        // kg
  std::vector<double> warehouse_balance_utility;  // kg
  std::vector<double> delivered;                  // kg, per agent
  std::vector<double> warehouse_inflow;           // kg, per site
  std::vector<double> amr_overflow;
  std::vector<double> amr_underflow;
  std::vector<double> warehouse_overflow;
  std::vector<double> warehouse_underflow;
};

struct StepOutcome {
  FactoryState next;
  std::vector<Observation> observations;
  double reward = 0.0;
  StepMetrics metrics;
  bool done = false;
};

// Load update: clip(current - delivered + received, 0, cap).
double load_update(double current, double delivered, double received,
                   double cap);

// TP / (TP + FP); 1 for an empty load.
double precision_utility(double tp, double fp);

// -(1 + tau * q).
double delay_utility(int quality_flag, int quality_delay);

// Penalty for an abnormal load. `residual` is |c - a + b| before clipping and
// the flags come from the clipped value. Never positive.
double balance_utility(double residual, double cap, bool hit_floor,
                       bool hit_ceiling);

struct StepUtilities {
  std::vector<double> precision;          // u^q per agent
  std::vector<double> delay;              // u^d per agent
  std::vector<double> amr_balance;        // u^b per agent
  std::vector<double> warehouse_balance;  // u^W per site
};

// Shared reward: sum_n (u^q + w_d u^d + w_b u^b) + w_W sum_m u^W.
double reward(const StepUtilities& utilities, const RewardWeights& weights);

std::pair<FactoryState, std::vector<Observation>> reset(
    const FactoryConfig& config, Rng& rng);
std::pair<FactoryState, std::vector<Observation>> reset(
    const FactoryConfig& config, std::uint64_t seed);

// Agent `agent`'s view: index bits (LSB first), own load, warehouse loads,
// loads normalized by capacity.
Observation observe(const FactoryConfig& config, const FactoryState& state,
                    int agent);
std::vector<Observation> observe_all(const FactoryConfig& config,
                                     const FactoryState& state);

// Ground-truth state for the centralized critic, normalized to [0, 1]:
// (load, delay) per agent, then warehouse loads.
std::vector<double> state_vector(const FactoryConfig& config,
                                 const FactoryState& state);

// Enters the schedule phase for the current step, drawing new per-agent
// precisions when a catalog/uniform phase begins.
void apply_schedule(const FactoryConfig& config, FactoryState& state,
                    Rng& rng);

std::vector<ArrivalDraw> sample_arrivals(const FactoryConfig& config,
                                         const FactoryState& state, Rng& rng);

// Deterministic part of a step given the upstream arrivals.
StepOutcome transition(const FactoryConfig& config, const FactoryState& state,
                       std::span<const AgentAction> actions,
                       std::span<const ArrivalDraw> arrivals);

StepOutcome step(const FactoryConfig& config, const FactoryState& state,
                 std::span<const AgentAction> actions, Rng& rng);

// Episode-level aggregation of step metrics.
struct EpisodeSummary {
  double total_reward = 0.0;
  double precision_pct = 0.0;       // mean over agents and steps
  double processing_time_min = 0.0; // sum of -u^d times minutes per step
  double avg_amr_load = 0.0;        // kg, mean over agents and steps
  double avg_warehouse_load = 0.0;  // kg, mean over sites and steps
  double amr_overflow = 0.0;        // kg, summed over agents and steps
  double warehouse_overflow = 0.0;
  double amr_underflow = 0.0;
  double warehouse_underflow = 0.0;
};

class EpisodeAccumulator {
 public:
  explicit EpisodeAccumulator(const FactoryConfig& config);
  void add(const StepOutcome& outcome);
  EpisodeSummary summary() const;
  int steps() const { return steps_; }

 private:
  double minutes_per_step_;
  int steps_ = 0;
  EpisodeSummary sum_;
  double precision_sum_ = 0.0;
  double amr_load_sum_ = 0.0;
  double warehouse_load_sum_ = 0.0;
};

}  // namespace qmarl::env
