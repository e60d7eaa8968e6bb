#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "qmarl/bench.hpp"
#include "qmarl/errors.hpp"

using namespace qmarl;
using namespace qmarl::bench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qmarl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

ExperimentConfig tiny(const fs::path& out) {
  ExperimentConfig c;
  c.env.num_agents = 2;
  c.env.episode_length = 5;
  c.train.max_epochs = 2;
  c.train.eval_episodes = 2;
  c.out = out;
  return c;
}

MetricsRecord record(std::string scheme, std::string kind, double base) {
  MetricsRecord r;
  r.scheme = std::move(scheme);
  r.kind = std::move(kind);
  r.total_reward = base;
  r.precision_pct = 90 + base / 10;
  r.processing_time_min = 100 + base;
  r.avg_amr_load_kg = 2 * base;
  return r;
}

}  // namespace

TEST(BenchConfig, ParsesKeysAndComments) {
  const auto c = parse_config(
      "# experiment\n"
      "scheme = comp2\n"
      "seeds = 3, 5 7\n"
      "env.num_agents = 2   # two robots\n"
      "env.quantity_levels = 20, 60\n"
      "env.normalize_balance = false\n"
      "train.max_epochs = 12\n"
      "train.gamma = 0.9\n");
  EXPECT_EQ(c.scheme, "comp2");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 5, 7}));
  EXPECT_EQ(c.env.num_agents, 2);
  EXPECT_EQ(c.env.quantity_levels, (std::vector<double>{20, 60}));
  EXPECT_FALSE(c.env.normalize_balance);
  EXPECT_EQ(c.train.max_epochs, 12);
  EXPECT_EQ(c.train.gamma, 0.9);
  EXPECT_NO_THROW(c.validate());
}

TEST(BenchConfig, ErrorsNameTheLine) {
  try {
    parse_config("scheme = proposed\n\nenv.num_agents = two\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(parse_config("nonsense = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("just text\n"), ConfigError);
  EXPECT_THROW(parse_config("seeds = \n"), ConfigError);
}

TEST(BenchConfig, ValidateRejectsBadSchemeAndSeeds) {
  ExperimentConfig c;
  c.scheme = "comp9";
  EXPECT_THROW(c.validate(), ConfigError);
  c.scheme = "proposed";
  c.seeds.clear();
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(BenchConfig, ScenarioResolvesRelativeToConfig) {
  const auto dir = scratch("scenario");
  write_file(dir / "phases.txt", "0 catalog\n30 0.619\n");
  write_file(dir / "exp.cfg", "scenario = phases.txt\n");
  const auto c = load_config(dir / "exp.cfg");
  ASSERT_TRUE(c.scenario.has_value());
  EXPECT_EQ(c.env.schedule.phases().size(), 2u);
  write_file(dir / "bad.cfg", "scenario = missing.txt\n");
  EXPECT_THROW(load_config(dir / "bad.cfg"), ConfigError);
}

TEST(BenchConfig, EveryDocumentedKeyIsAccepted) {
  for (const auto& key : config_keys()) {
    ExperimentConfig c;
    std::string value = "1";
    if (key == "scheme") value = "proposed";
    if (key == "out") value = "somewhere";
    if (key == "scenario") continue;
    if (key == "env.normalize_balance") value = "true";
    EXPECT_NO_THROW(apply_setting(c, key, value)) << key;
  }
}

TEST(BenchMetrics, RoundTrip) {
  auto r = record("proposed", "eval", 1.0 / 3.0);
  r.seed = 17;
  r.epoch = 4;
  r.warehouse_underflow_kg = 1e-300;
  EXPECT_EQ(parse_json_line(to_json_line(r)), r);
}

TEST(BenchReport, SingleFileAndIdenticalFiles) {
  const auto dir = scratch("report");
  const std::vector<MetricsRecord> rows{record("proposed", "eval", 1.0),
                                        record("proposed", "eval", 3.0)};
  write_metrics(dir / "a.jsonl", rows);
  write_metrics(dir / "b.jsonl", rows);
  const auto one = summarize({dir / "a.jsonl"});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].mean[0], 2.0);
  for (double s : one[0].std) EXPECT_EQ(s, 0.0);
  const auto two = summarize({dir / "a.jsonl", dir / "b.jsonl"});
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0].files, 2);
  EXPECT_EQ(two[0].mean, one[0].mean);
  for (double s : two[0].std) EXPECT_EQ(s, 0.0);
}

TEST(BenchReport, StdAcrossFiles) {
  const auto dir = scratch("report_std");
  write_metrics(dir / "a.jsonl", {record("comp2", "eval", 1.0)});
  write_metrics(dir / "b.jsonl", {record("comp2", "eval", 3.0)});
  const auto rows = summarize({dir / "a.jsonl", dir / "b.jsonl"});
  EXPECT_EQ(rows[0].mean[0], 2.0);
  EXPECT_EQ(rows[0].std[0], 1.0);
}

TEST(BenchReport, FiveSchemesFiveRows) {
  const auto dir = scratch("report5");
  std::vector<fs::path> files;
  for (const char* s : {"proposed", "comp1", "comp2", "comp3", "comp4"}) {
    files.push_back(dir / (std::string(s) + ".jsonl"));
    write_metrics(files.back(), {record(s, "eval", 1.0)});
  }
  const auto rows = summarize(files);
  EXPECT_EQ(rows.size(), 5u);
  std::ostringstream table;
  write_summary_table(table, rows);
  int lines = 0;
  for (char ch : table.str()) lines += ch == '\n';
  EXPECT_EQ(lines, 6);
  EXPECT_NE(table.str().find("Precision %"), std::string::npos);
  std::ostringstream csv;
  write_report_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, 40), "scheme,kind,files,total_reward_mean,tota");
}

TEST(BenchReport, SchemaMismatchNamesLine) {
  const auto dir = scratch("report_bad");
  write_metrics(dir / "a.jsonl", {record("comp2", "eval", 1.0)});
  std::ofstream(dir / "a.jsonl", std::ios::app) << "{\"scheme\":\"comp2\"}\n";
  try {
    summarize({dir / "a.jsonl"});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(summarize({}), ConfigError);
}

TEST(BenchExperiment, EvalOnlyWhenNoEpochs) {
  auto c = tiny(scratch("eval_only"));
  c.train.max_epochs = 0;
  const auto out = run_experiment(c);
  ASSERT_EQ(out.metrics_files.size(), 1u);
  const auto rows = read_metrics(out.metrics_files[0]);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_EQ(r.kind, "eval");
}

TEST(BenchExperiment, ByteIdenticalReruns) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto ca = tiny(a), cb = tiny(b);
  run_experiment(ca);
  run_experiment(cb);
  EXPECT_EQ(slurp(metrics_path(a, "proposed", 0)), slurp(metrics_path(b, "proposed", 0)));
  EXPECT_EQ(slurp(snapshot_path(a, "proposed", 0)), slurp(snapshot_path(b, "proposed", 0)));
}

TEST(BenchExperiment, Comp4WritesNoSnapshot) {
  auto c = tiny(scratch("comp4"));
  c.scheme = "comp4";
  const auto out = run_experiment(c);
  EXPECT_TRUE(out.snapshots.empty());
  EXPECT_FALSE(fs::exists(snapshot_path(c.out, "comp4", 0)));
  EXPECT_EQ(read_metrics(out.metrics_files[0]).size(), 4u);
}

TEST(BenchSnapshot, RoundTripAndMismatch) {
  auto c = tiny(scratch("snap"));
  run_experiment(c);
  const auto snap = read_snapshot(snapshot_path(c.out, "proposed", 0));
  EXPECT_EQ(snap.actor_params.size(), 54u);
  EXPECT_EQ(snap.critic_params.size(), 54u);
  const auto path = c.out / "copy.json";
  write_snapshot(path, snap);
  const auto again = read_snapshot(path);
  EXPECT_EQ(again.actor_params, snap.actor_params);
  EXPECT_EQ(again.critic_params, snap.critic_params);
  const auto comp2 = make_scheme("comp2", c.env, c.train);
  EXPECT_THROW(check_snapshot(snap, comp2), ConfigError);
  auto wrong = snap;
  wrong.actor_params.pop_back();
  EXPECT_THROW(check_snapshot(wrong, make_scheme("proposed", c.env, c.train)), ConfigError);
  EXPECT_EQ(evaluate_snapshot(c, snap, 0).size(), 2u);
}

TEST(BenchEncoding, Targets) {
  EXPECT_EQ(encoding_target({1, 0, 1, 0}), 1.25);
  EXPECT_EQ(encoding_target({0, 0, 0, 0}), 0.0);
  EXPECT_EQ(encoding_target({1, 1, 1, 1}), 1.875);
}

TEST(BenchEncoding, FiftyParametersEach) {
  for (Encoding e : kEncodings) {
    EXPECT_EQ(EncodingRegressor(e, 50).parameter_count(), 50u);
  }
  EXPECT_EQ(EncodingRegressor(Encoding::OneVariable, 50).layout().num_qubits(), 4);
  EXPECT_EQ(EncodingRegressor(Encoding::TwoVariable, 50).layout().num_qubits(), 2);
  EXPECT_EQ(EncodingRegressor(Encoding::FourVariable, 50).layout().num_qubits(), 1);
  EXPECT_THROW(EncodingRegressor(Encoding::OneVariable, 0), ConfigError);
}

std::size_t distinct_predictions(const EncodingRegressor& model, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> p(model.parameter_count());
  for (double& v : p) v = uniform(rng, -3, 3);
  std::set<long long> distinct;
  for (int k = 0; k < 16; ++k) {
    const std::array<int, 4> bits{(k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1};
    distinct.insert(std::llround(model.predict(bits, p) * 1e9));
  }
  return distinct.size();
}

TEST(BenchEncoding, FourVariableCollapsesInputs) {
  // Only the pair sums survive; at the poles the RZ phase is invisible.
  EXPECT_EQ(distinct_predictions(EncodingRegressor(Encoding::FourVariable, 50), 1), 5u);
  EXPECT_EQ(distinct_predictions(EncodingRegressor(Encoding::OneVariable, 50), 1), 16u);
  const EncodingRegressor at_pi(Encoding::FourVariable, 50, std::numbers::pi);
  EXPECT_EQ(distinct_predictions(at_pi, 1), 2u);
}

TEST(BenchEncoding, DenseEncodingsAtPiOnlySeeParities) {
  // RY(pi) RX(pi) |0> is |0> up to phase, so each qubit carries the XOR of
  // its pair, which is independent of every bit: the best fit is the mean.
  const double variance = 85.0 / 256.0;
  Rng rng(4);
  for (Encoding e : {Encoding::TwoVariable, Encoding::FourVariable}) {
    const EncodingRegressor model(e, 50, std::numbers::pi);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> p(50);
      for (double& v : p) v = uniform(rng, -3, 3);
      EXPECT_GE(model.loss(p), variance - 1e-12);
    }
  }
}

TEST(BenchEncoding, GradientMatchesFiniteDifference) {
  Rng rng(2);
  for (Encoding e : kEncodings) {
    const EncodingRegressor model(e, 10);
    std::vector<double> p(10);
    for (double& v : p) v = uniform(rng, -3, 3);
    const auto g = model.loss_gradient(p);
    const double h = 1e-4;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto hi = p, lo = p;
      hi[i] += h;
      lo[i] -= h;
      EXPECT_NEAR(g[i], (model.loss(hi) - model.loss(lo)) / (2 * h), 1e-6);
    }
  }
}

TEST(BenchEncoding, TrainingReducesError) {
  const auto run = train_encoding(Encoding::TwoVariable, 50, 3, 40, 0.05);
  ASSERT_EQ(run.mse.size(), 41u);
  EXPECT_LT(run.final_mse(), run.mse.front());
}

TEST(BenchRobustness, ScheduleCoverage) {
  env::FactoryConfig c;
  c.schedule = env::PrecisionSchedule::four_phase();
  EXPECT_NO_THROW(check_schedule_covers(c));
  c.episode_length = 20;  // 40 minutes: the last two phases never start
  EXPECT_THROW(check_schedule_covers(c), ConfigError);
  EXPECT_THROW(env::PrecisionSchedule::parse("# nothing\n"), ConfigError);
}

TEST(BenchRobustness, HighPrecisionScenarioStaysHigh) {
  auto c = tiny(scratch("robust"));
  c.env.episode_length = 30;
  c.env.schedule = env::PrecisionSchedule::parse("0 0.971\n");
  c.scheme = "comp4";
  Snapshot snap;
  snap.scheme = "comp4";
  snap.actor_description = make_scheme("comp4", c.env, c.train).actor->describe();
  const auto series = robustness_scenario(c, snap, 1, 100);
  ASSERT_EQ(series.size(), 30u);
  double mean = 0.0;
  for (const auto& p : series) {
    EXPECT_LE(p.mean_precision, 1.0);
    mean += p.mean_precision;
  }
  mean /= 30.0;
  // Monte Carlo oracle of the arrival model alone: panels ~ floor(U(0,60)/6),
  // TP = floor(0.971 k) + Bernoulli(frac), pooled over the whole load.
  Rng rng(99);
  double tp = 0, total = 0;
  for (int k = 0; k < 200000; ++k) {
    const double panels = std::floor(uniform(rng, 0, 60) / 6);
    const double e = panels * 0.971;
    double t = std::floor(e);
    if (uniform01(rng) < e - t) t += 1;
    tp += t;
    total += panels;
  }
  EXPECT_NEAR(tp / total, 0.971, 0.002);
  EXPECT_GE(mean, 0.95);
  const auto again = robustness_scenario(c, snap, 1, 100);
  for (std::size_t t = 0; t < series.size(); ++t) {
    EXPECT_EQ(series[t].mean_precision, again[t].mean_precision);
  }
}
