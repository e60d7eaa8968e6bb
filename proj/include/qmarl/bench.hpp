#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmarl/factory_env.hpp"
#include "qmarl/metrics.hpp"
#include "qmarl/models.hpp"
#include "qmarl/qmac.hpp"
#include "qmarl/qsim.hpp"
#include "qmarl/vqc.hpp"

// Experiment harness: configuration files, per-seed training runs, parameter
// snapshots, the encoding benchmark, the robustness scenario and reports.

namespace qmarl::bench {

inline constexpr double kDefaultBitAngle = std::numbers::pi / 2.0;

struct EncodeBenchConfig {
  int iterations = 500;
  double learning_rate = 0.05;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  // Rotation angle encoding a set bit; a cleared bit encodes as 0.
  double bit_angle = kDefaultBitAngle;
};

struct ExperimentConfig {
  std::string scheme = "proposed";
  std::vector<std::uint64_t> seeds{0};
  env::FactoryConfig env;
  qmac::TrainConfig train;
  // Precision schedule used for training and evaluation episodes.
  std::optional<std::filesystem::path> scenario;
  std::filesystem::path out = "runs";
  // Parameter budget override for the baselines; 0 keeps their default.
  double budget = 0.0;
  int robustness_iterations = 100;
  EncodeBenchConfig encode;

  // Throws ConfigError.
  void validate() const;
};

// Applies one `key = value` setting, e.g. "env.num_agents" = "2".
// Throws ConfigError for unknown keys or malformed values.
void apply_setting(ExperimentConfig& config, std::string_view key,
                   std::string_view value);

// Line-oriented `key = value` text; '#' starts a comment. Relative scenario
// paths resolve against `base_dir`. Errors name the line.
ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Every accepted configuration key, in documentation order.
const std::vector<std::string>& config_keys();

// "proposed" or a baseline name.
Scheme make_scheme(std::string_view name, const env::FactoryConfig& env_config,
                   const qmac::TrainConfig& train_config, double budget = 0.0);

// Trained parameters with the architecture text they belong to.
struct Snapshot {
  std::string scheme;
  std::uint64_t seed = 0;
  std::string actor_description;
  std::vector<double> actor_params;
  std::string critic_description;
  std::vector<double> critic_params;
};

Snapshot make_snapshot(const Scheme& scheme, std::uint64_t seed,
                       const qmac::TrainingResult& result);
void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot);
Snapshot read_snapshot(const std::filesystem::path& path);
// Throws ConfigError when the snapshot was not produced by `scheme`.
void check_snapshot(const Snapshot& snapshot, const Scheme& scheme);

std::filesystem::path metrics_path(const std::filesystem::path& out,
                                   std::string_view scheme, std::uint64_t seed);
std::filesystem::path snapshot_path(const std::filesystem::path& out,
                                    std::string_view scheme, std::uint64_t seed);

struct ExperimentOutputs {
  std::vector<std::filesystem::path> metrics_files;
  std::vector<std::filesystem::path> snapshots;
};

// For each seed: train, evaluate the final policy over eval_episodes
// episodes and write metrics_<scheme>_seed<s>.jsonl (train rows, then eval
// rows) plus snapshot_<scheme>_seed<s>.json for trainable schemes.
// Progress lines go to `log` when given.
ExperimentOutputs run_experiment(const ExperimentConfig& config,
                                 std::ostream* log = nullptr);

// Evaluation rows for a stored snapshot.
std::vector<MetricsRecord> evaluate_snapshot(const ExperimentConfig& config,
                                             const Snapshot& snapshot,
                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Encoding benchmark: regress y = sum_i x_i 2^(1-i) from four bits.

enum class Encoding { OneVariable, TwoVariable, FourVariable };

std::string_view encoding_name(Encoding e);
inline constexpr Encoding kEncodings[] = {
    Encoding::OneVariable, Encoding::TwoVariable, Encoding::FourVariable};

double encoding_target(const std::array<int, 4>& bits);

// Regressor with `budget` trainable angles (must be >= 1). Prediction is
// (1 - <Z_0>) / 2 scaled to the target range [0, 1.875].
class EncodingRegressor {
 public:
  EncodingRegressor(Encoding encoding, int budget,
                    double bit_angle = kDefaultBitAngle);

  Encoding encoding() const { return encoding_; }
  const vqc::CircuitLayout& layout() const { return layout_; }
  std::size_t parameter_count() const { return layout_.parameter_count(); }

  qsim::StateVector encode(const std::array<int, 4>& bits) const;
  double predict(const std::array<int, 4>& bits,
                 std::span<const double> params) const;
  // Mean squared error over all 16 patterns and its parameter-shift gradient.
  double loss(std::span<const double> params) const;
  std::vector<double> loss_gradient(std::span<const double> params) const;

 private:
  Encoding encoding_;
  vqc::CircuitLayout layout_;
  double bit_angle_;
};

struct EncodingRun {
  Encoding encoding;
  std::uint64_t seed = 0;
  std::vector<double> mse;  // before each step, then the final value
  double final_mse() const { return mse.back(); }
};

EncodingRun train_encoding(Encoding encoding, int budget, std::uint64_t seed,
                           int iterations, double learning_rate,
                           double bit_angle = kDefaultBitAngle);

std::vector<EncodingRun> encoding_benchmark(int budget,
                                            const EncodeBenchConfig& config);

// ---------------------------------------------------------------------------
// Robustness scenario.

struct PrecisionPoint {
  int step = 0;
  double minute = 0.0;  // start of the step
  std::size_t phase = 0;
  double mean_precision = 0.0;  // over agents and iterations, in [0, 1]
};

// Throws ConfigError unless every phase starts inside the episode.
void check_schedule_covers(const env::FactoryConfig& config);

// Greedy rollouts of the snapshot policy under config.env's schedule;
// episode i uses eval_episode_seed(seed, i).
std::vector<PrecisionPoint> robustness_scenario(const ExperimentConfig& config,
                                                const Snapshot& snapshot,
                                                std::uint64_t seed,
                                                int iterations);

void write_precision_series(const std::filesystem::path& path,
                            const std::vector<PrecisionPoint>& series);

// ---------------------------------------------------------------------------
// Reports.

struct SummaryRow {
  std::string scheme;
  std::string kind;
  int files = 0;
  std::vector<double> mean;  // per metric column
  std::vector<double> std;   // population std across files
};

// Each file contributes its per-(scheme, kind) column means; rows are then
// mean and std across files, ordered by scheme then kind.
std::vector<SummaryRow> summarize(
    const std::vector<std::filesystem::path>& files);

// Columns: scheme,kind,files,<metric>_mean,<metric>_std,...
void write_report_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
// Fixed-width table of the eval rows.
void write_summary_table(std::ostream& out,
                         const std::vector<SummaryRow>& rows);

}  // namespace qmarl::bench
