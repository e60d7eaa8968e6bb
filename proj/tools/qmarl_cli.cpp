// Command-line front end for training, evaluation and the benchmarks.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qmarl/bench.hpp"
#include "qmarl/errors.hpp"

namespace fs = std::filesystem;
using namespace qmarl;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string scheme;
  std::string scenario;
  std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_scheme) {
  cmd->add_option("--config", o.config, "Key-value config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Run this single seed");
  cmd->add_option("--out", o.out, "Output directory");
  if (with_scheme) {
    cmd->add_option("--scheme", o.scheme,
                    "proposed, comp1, comp2, comp3 or comp4");
  }
  cmd->add_option("--scenario", o.scenario, "Precision schedule file");
  cmd->add_option("--set", o.settings, "Override a config key (key=value)");
}

bench::ExperimentConfig resolve(const CommonOptions& o) {
  bench::ExperimentConfig c =
      o.config.empty() ? bench::ExperimentConfig{} : bench::load_config(o.config);
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    bench::apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.scheme.empty()) c.scheme = o.scheme;
  if (!o.out.empty()) c.out = o.out;
  if (!o.scenario.empty()) bench::apply_setting(c, "scenario", o.scenario);
  if (o.seed) c.seeds = {*o.seed};
  return c;
}

bench::Snapshot load_or_empty(const bench::ExperimentConfig& c,
                              const std::string& path, std::uint64_t seed) {
  const Scheme scheme = bench::make_scheme(c.scheme, c.env, c.train, c.budget);
  if (!scheme.trainable()) {
    bench::Snapshot s;
    s.scheme = scheme.name;
    s.seed = seed;
    s.actor_description = scheme.actor->describe();
    return s;
  }
  const fs::path p =
      path.empty() ? bench::snapshot_path(c.out, c.scheme, seed) : fs::path(path);
  return bench::read_snapshot(p);
}

int cmd_train(const CommonOptions& o) {
  const auto c = resolve(o);
  const auto outputs = bench::run_experiment(c, &std::cerr);
  for (const auto& p : outputs.metrics_files) std::cout << p.string() << '\n';
  for (const auto& p : outputs.snapshots) std::cout << p.string() << '\n';
  return 0;
}

int cmd_eval(const CommonOptions& o, const std::string& snapshot) {
  auto c = resolve(o);
  c.validate();
  fs::create_directories(c.out);
  for (std::uint64_t seed : c.seeds) {
    const auto snap = load_or_empty(c, snapshot, seed);
    if (!snapshot.empty()) c.scheme = snap.scheme;
    const auto records = bench::evaluate_snapshot(c, snap, seed);
    const auto path = c.out / ("eval_" + snap.scheme + "_seed" +
                               std::to_string(seed) + ".jsonl");
    write_metrics(path, records);
    double mean = 0.0;
    for (const auto& r : records) mean += r.total_reward;
    if (!records.empty()) mean /= static_cast<double>(records.size());
    std::cout << path.string() << " mean_reward " << mean << '\n';
  }
  return 0;
}

int cmd_encode(const CommonOptions& o, int budget,
               std::optional<int> iterations) {
  auto c = resolve(o);
  if (o.seed) c.encode.seeds = {*o.seed};
  if (iterations) c.encode.iterations = *iterations;
  c.validate();
  const auto runs = bench::encoding_benchmark(budget, c.encode);
  fs::create_directories(c.out);
  std::ofstream summary(c.out / "encoding_mse.csv", std::ios::binary);
  std::ofstream curve(c.out / "encoding_curve.csv", std::ios::binary);
  if (!summary || !curve) throw ConfigError("cannot write to " + c.out.string());
  summary << "encoding,seed,final_mse\n";
  curve << "encoding,seed,iteration,mse\n";
  for (const auto& r : runs) {
    summary << bench::encoding_name(r.encoding) << ',' << r.seed << ','
            << r.final_mse() << '\n';
    for (std::size_t i = 0; i < r.mse.size(); ++i) {
      curve << bench::encoding_name(r.encoding) << ',' << r.seed << ',' << i
            << ',' << r.mse[i] << '\n';
    }
    std::cout << bench::encoding_name(r.encoding) << " seed " << r.seed
              << " final_mse " << r.final_mse() << '\n';
  }
  return 0;
}

int cmd_robustness(const CommonOptions& o, const std::string& snapshot,
                   std::optional<int> iterations) {
  auto c = resolve(o);
  if (o.scenario.empty() && !c.scenario) {
    c.env.schedule = env::PrecisionSchedule::four_phase();
  }
  if (iterations) c.robustness_iterations = *iterations;
  c.validate();
  fs::create_directories(c.out);
  for (std::uint64_t seed : c.seeds) {
    const auto snap = load_or_empty(c, snapshot, seed);
    const auto series =
        bench::robustness_scenario(c, snap, seed, c.robustness_iterations);
    const auto path = c.out / ("robustness_" + snap.scheme + "_seed" +
                               std::to_string(seed) + ".csv");
    bench::write_precision_series(path, series);
    std::cout << path.string() << '\n';
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& files, const std::string& out) {
  std::vector<fs::path> paths(files.begin(), files.end());
  const auto rows = bench::summarize(paths);
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  fs::create_directories(dir);
  std::ofstream csv(dir / "report.csv", std::ios::binary);
  std::ofstream table(dir / "summary.txt", std::ios::binary);
  if (!csv || !table) throw ConfigError("cannot write to " + dir.string());
  bench::write_report_csv(csv, rows);
  bench::write_summary_table(table, rows);
  bench::write_summary_table(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum multi-agent actor-critic for factory logistics"};
  app.require_subcommand(1);

  CommonOptions train_opts;
  auto* train = app.add_subcommand("train", "Train a scheme for each seed");
  add_common(train, train_opts, true);

  CommonOptions eval_opts;
  std::string eval_snapshot;
  auto* eval = app.add_subcommand("eval", "Evaluate a trained snapshot");
  add_common(eval, eval_opts, true);
  eval->add_option("--snapshot", eval_snapshot, "Snapshot file")
      ->check(CLI::ExistingFile);

  CommonOptions enc_opts;
  int enc_budget = 50;
  std::optional<int> enc_iterations;
  auto* enc = app.add_subcommand("encode-bench", "Encoding benchmark");
  add_common(enc, enc_opts, false);
  enc->add_option("--budget", enc_budget, "Trainable angles per regressor");
  enc->add_option("--iterations", enc_iterations, "Optimizer steps");

  CommonOptions rob_opts;
  std::string rob_snapshot;
  std::optional<int> rob_iterations;
  auto* rob = app.add_subcommand("robustness",
                                 "Per-minute precision under a schedule");
  add_common(rob, rob_opts, true);
  rob->add_option("--snapshot", rob_snapshot, "Snapshot file")
      ->check(CLI::ExistingFile);
  rob->add_option("--iterations", rob_iterations, "Evaluation episodes");

  std::vector<std::string> report_files;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Aggregate metrics files");
  report->add_option("files", report_files, "Metrics files")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return cmd_train(train_opts);
    if (*eval) return cmd_eval(eval_opts, eval_snapshot);
    if (*enc) return cmd_encode(enc_opts, enc_budget, enc_iterations);
    if (*rob) return cmd_robustness(rob_opts, rob_snapshot, rob_iterations);
    if (*report) return cmd_report(report_files, report_out);
  } catch (const std::exception& e) {
    std::cerr << "qmarl: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
