#include "qmarl/metrics.hpp"

#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "qmarl/errors.hpp"

namespace qmarl {

using ordered_json = nlohmann::ordered_json;

MetricsRecord make_record(std::string scheme, std::uint64_t seed,
                          std::string kind, int epoch,
                          const env::EpisodeSummary& s) {
  MetricsRecord r;
  r.scheme = std::move(scheme);
  r.seed = seed;
  r.kind = std::move(kind);
  r.epoch = epoch;
  r.total_reward = s.total_reward;
  r.precision_pct = s.precision_pct;
  r.processing_time_min = s.processing_time_min;
  r.avg_amr_load_kg = s.avg_amr_load;
  r.avg_warehouse_load_kg = s.avg_warehouse_load;
  r.amr_overflow_kg = s.amr_overflow;
  r.warehouse_overflow_kg = s.warehouse_overflow;
  r.amr_underflow_kg = s.amr_underflow;
  r.warehouse_underflow_kg = s.warehouse_underflow;
  return r;
}

const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols{
      "total_reward",         "precision_pct",
      "processing_time_min",  "avg_amr_load_kg",
      "avg_warehouse_load_kg", "amr_overflow_kg",
      "warehouse_overflow_kg", "amr_underflow_kg",
      "warehouse_underflow_kg"};
  return cols;
}

std::vector<double> metric_values(const MetricsRecord& r) {
  return {r.total_reward,         r.precision_pct,
          r.processing_time_min,  r.avg_amr_load_kg,
          r.avg_warehouse_load_kg, r.amr_overflow_kg,
          r.warehouse_overflow_kg, r.amr_underflow_kg,
          r.warehouse_underflow_kg};
}

std::string to_json_line(const MetricsRecord& r) {
  ordered_json j;
  j["scheme"] = r.scheme;
  j["seed"] = r.seed;
  j["kind"] = r.kind;
  j["epoch"] = r.epoch;
  const auto values = metric_values(r);
  for (std::size_t i = 0; i < values.size(); ++i) {
    j[metric_columns()[i]] = values[i];
  }
  return j.dump();
}

MetricsRecord parse_json_line(std::string_view line, int line_no) {
  const std::string where = "line " + std::to_string(line_no) + ": ";
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(where + "invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw ParseError(where + "expected a JSON object");
  auto field = [&](const char* key) -> const ordered_json& {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(where + "missing key '" + key + "'");
    return *it;
  };
  MetricsRecord r;
  try {
    const auto& scheme = field("scheme");
    const auto& kind = field("kind");
    if (!scheme.is_string() || !kind.is_string()) {
      throw ParseError(where + "'scheme' and 'kind' must be strings");
    }
    r.scheme = scheme.get<std::string>();
    r.kind = kind.get<std::string>();
    const auto& seed = field("seed");
    const auto& epoch = field("epoch");
    if (!seed.is_number_unsigned() || !epoch.is_number_integer()) {
      throw ParseError(where + "'seed' and 'epoch' must be integers");
    }
    r.seed = seed.get<std::uint64_t>();
    r.epoch = epoch.get<int>();
    std::vector<double> values;
    for (const auto& col : metric_columns()) {
      const auto& v = field(col.c_str());
      if (!v.is_number()) throw ParseError(where + "'" + col + "' must be a number");
      values.push_back(v.get<double>());
    }
    r.total_reward = values[0];
    r.precision_pct = values[1];
    r.processing_time_min = values[2];
    r.avg_amr_load_kg = values[3];
    r.avg_warehouse_load_kg = values[4];
    r.amr_overflow_kg = values[5];
    r.warehouse_overflow_kg = values[6];
    r.amr_underflow_kg = values[7];
    r.warehouse_underflow_kg = values[8];
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + e.what());
  }
  return r;
}

void write_metrics(std::ostream& out, const std::vector<MetricsRecord>& records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

void write_metrics(const std::filesystem::path& path,
                   const std::vector<MetricsRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_metrics(out, records);
}

std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open metrics file " + path.string());
  std::vector<MetricsRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_json_line(line, line_no));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qmarl
