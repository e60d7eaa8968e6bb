#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qmarl/factory_env.hpp"

namespace qmarl {

// One line of a metrics file. `kind` is "train" for per-epoch rollout
// statistics and "eval" for greedy evaluation episodes.
struct MetricsRecord {
  std::string scheme;
  std::uint64_t seed = 0;
  std::string kind = "train";
  int epoch = 0;
  double total_reward = 0.0;
  double precision_pct = 0.0;
  double processing_time_min = 0.0;
  double avg_amr_load_kg = 0.0;
  double avg_warehouse_load_kg = 0.0;
  double amr_overflow_kg = 0.0;
  double warehouse_overflow_kg = 0.0;
  double amr_underflow_kg = 0.0;
  double warehouse_underflow_kg = 0.0;

  bool operator==(const MetricsRecord&) const = default;
};

MetricsRecord make_record(std::string scheme, std::uint64_t seed,
                          std::string kind, int epoch,
                          const env::EpisodeSummary& summary);

// Names of the numeric columns, in file order.
const std::vector<std::string>& metric_columns();
std::vector<double> metric_values(const MetricsRecord& record);

// JSON object per line with a fixed key order.
std::string to_json_line(const MetricsRecord& record);
// Throws ParseError naming `line_no` when a key is missing or mistyped.
MetricsRecord parse_json_line(std::string_view line, int line_no = 0);

void write_metrics(std::ostream& out, const std::vector<MetricsRecord>& records);
void write_metrics(const std::filesystem::path& path,
                   const std::vector<MetricsRecord>& records);
// Blank lines are skipped; errors carry "<path>:<line>".
std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path);

}  // namespace qmarl
