// Python module qmarl._core.

#include <pybind11/complex.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "qmarl/baselines.hpp"
#include "qmarl/bench.hpp"
#include "qmarl/errors.hpp"
#include "qmarl/factory_env.hpp"
#include "qmarl/metrics.hpp"
#include "qmarl/qmac.hpp"
#include "qmarl/qsim.hpp"
#include "qmarl/vqc.hpp"

namespace py = pybind11;
using namespace qmarl;

namespace {

py::dict record_dict(const MetricsRecord& r) {
  py::dict d;
  d["scheme"] = r.scheme;
  d["seed"] = r.seed;
  d["kind"] = r.kind;
  d["epoch"] = r.epoch;
  const auto& cols = metric_columns();
  const auto vals = metric_values(r);
  for (std::size_t i = 0; i < cols.size(); ++i) d[py::str(cols[i])] = vals[i];
  return d;
}

py::list record_list(const std::vector<MetricsRecord>& records) {
  py::list out;
  for (const auto& r : records) out.append(record_dict(r));
  return out;
}

std::vector<env::AgentAction> to_actions(const std::vector<int>& indices) {
  std::vector<env::AgentAction> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back({i});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Statevector VQC simulator, smart-factory environment and quantum multi-agent actor-critic";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<SpecError>(m, "SpecError", base);
  py::register_exception<EncodingError>(m, "EncodingError", base);
  py::register_exception<NumericError>(m, "NumericError", base);
  py::register_exception<ContractError>(m, "ContractError", base);
  py::register_exception<ParseError>(m, "ParseError", base);

  // qsim
  py::enum_<qsim::GateKind>(m, "GateKind")
      .value("X", qsim::GateKind::X)
      .value("Y", qsim::GateKind::Y)
      .value("Z", qsim::GateKind::Z)
      .value("RX", qsim::GateKind::RX)
      .value("RY", qsim::GateKind::RY)
      .value("RZ", qsim::GateKind::RZ)
      .value("CZ", qsim::GateKind::CZ)
      .value("CNOT", qsim::GateKind::CNOT);

  py::class_<qsim::GateSpec>(m, "GateSpec")
      .def(py::init<qsim::GateKind, int, std::optional<int>, std::optional<double>>(),
           py::arg("kind"), py::arg("target"), py::arg("control") = py::none(),
           py::arg("angle") = py::none())
      .def_readwrite("kind", &qsim::GateSpec::kind)
      .def_readwrite("target", &qsim::GateSpec::target)
      .def_readwrite("control", &qsim::GateSpec::control)
      .def_readwrite("angle", &qsim::GateSpec::angle)
      .def_static("x", &qsim::GateSpec::x)
      .def_static("y", &qsim::GateSpec::y)
      .def_static("z", &qsim::GateSpec::z)
      .def_static("rx", &qsim::GateSpec::rx)
      .def_static("ry", &qsim::GateSpec::ry)
      .def_static("rz", &qsim::GateSpec::rz)
      .def_static("cz", &qsim::GateSpec::cz)
      .def_static("cnot", &qsim::GateSpec::cnot)
      .def("inverse", [](const qsim::GateSpec& g) { return qsim::inverse(g); })
      .def(py::self == py::self);

  py::class_<qsim::StateVector>(m, "StateVector")
      .def(py::init<int>(), py::arg("num_qubits"))
      .def_static("from_amplitudes", &qsim::StateVector::from_amplitudes)
      .def_property_readonly("num_qubits", &qsim::StateVector::num_qubits)
      .def_property_readonly("amplitudes", [](const qsim::StateVector& s) {
        return std::vector<qsim::Amplitude>(s.amplitudes().begin(), s.amplitudes().end());
      })
      .def("norm_squared", &qsim::StateVector::norm_squared)
      .def("apply", &qsim::StateVector::apply, py::arg("gate"))
      .def("expectation_z", &qsim::StateVector::expectation_z, py::arg("wire"));

  m.def("apply_gate", &qsim::apply_gate, py::arg("state"), py::arg("gate"));
  m.def("apply_circuit",
        [](qsim::StateVector s, const std::vector<qsim::GateSpec>& gates) {
          return qsim::apply_circuit(std::move(s), gates);
        },
        py::arg("state"), py::arg("gates"));
  m.def("expectation_z", &qsim::expectation_z, py::arg("state"), py::arg("wire"));

  // vqc
  py::enum_<vqc::Role>(m, "Role")
      .value("Actor", vqc::Role::Actor)
      .value("Critic", vqc::Role::Critic);

  py::class_<vqc::CircuitLayout>(m, "CircuitLayout")
      .def_property_readonly("num_qubits", &vqc::CircuitLayout::num_qubits)
      .def_property_readonly("parameter_count", &vqc::CircuitLayout::parameter_count)
      .def_property_readonly("measured_wires", &vqc::CircuitLayout::measured_wires)
      .def("gates",
           [](const vqc::CircuitLayout& l, const std::vector<double>& p) { return l.gates(p); })
      .def("describe", &vqc::CircuitLayout::describe);

  m.def("default_layout", &vqc::default_layout, py::arg("role"));
  m.def("parse_layout", &vqc::parse_layout, py::arg("text"));
  m.def("encode_actor_observation",
        [](const std::vector<double>& a, int n) { return vqc::encode_actor_observation(a, n); },
        py::arg("angles"), py::arg("num_qubits"));
  m.def("encode_critic_state",
        [](const std::vector<double>& a, int n) { return vqc::encode_critic_state(a, n); },
        py::arg("angles"), py::arg("num_qubits"));
  m.def("evaluate_observables",
        [](const vqc::CircuitLayout& l, const std::vector<double>& p,
           const qsim::StateVector& s) { return vqc::evaluate_observables(l, p, s); },
        py::arg("layout"), py::arg("params"), py::arg("encoded"));
  m.def("parameter_shift_gradient",
        [](const vqc::CircuitLayout& l, const std::vector<double>& p,
           const qsim::StateVector& s, const std::vector<double>& up) {
          return vqc::parameter_shift_gradient(l, p, s, up);
        },
        py::arg("layout"), py::arg("params"), py::arg("encoded"), py::arg("upstream"));

  // factory environment
  py::class_<env::FactoryConfig>(m, "FactoryConfig")
      .def(py::init<>())
      .def_readwrite("num_agents", &env::FactoryConfig::num_agents)
      .def_readwrite("num_sites", &env::FactoryConfig::num_sites)
      .def_readwrite("warehouse_capacity", &env::FactoryConfig::warehouse_capacity)
      .def_readwrite("amr_capacity", &env::FactoryConfig::amr_capacity)
      .def_readwrite("episode_length", &env::FactoryConfig::episode_length)
      .def_readwrite("lcd_unit_weight", &env::FactoryConfig::lcd_unit_weight)
      .def_readwrite("precision_catalog", &env::FactoryConfig::precision_catalog)
      .def_readwrite("quality_delay", &env::FactoryConfig::quality_delay)
      .def_readwrite("arrival_cap", &env::FactoryConfig::arrival_cap)
      .def_readwrite("warehouse_outflow", &env::FactoryConfig::warehouse_outflow)
      .def_readwrite("quantity_levels", &env::FactoryConfig::quantity_levels)
      .def_readwrite("minutes_per_step", &env::FactoryConfig::minutes_per_step)
      .def_readwrite("normalize_balance", &env::FactoryConfig::normalize_balance)
      .def_property_readonly("observation_size", &env::FactoryConfig::observation_size)
      .def_property_readonly("state_size", &env::FactoryConfig::state_size)
      .def_property_readonly("action_count", &env::FactoryConfig::action_count)
      .def("validate", &env::FactoryConfig::validate);

  py::class_<env::FactoryState>(m, "FactoryState")
      .def_readonly("t", &env::FactoryState::t)
      .def_readonly("warehouse_loads", &env::FactoryState::warehouse_loads)
      .def_readonly("amr_loads", &env::FactoryState::amr_loads)
      .def_readonly("true_positives", &env::FactoryState::true_positives)
      .def_readonly("false_positives", &env::FactoryState::false_positives)
      .def_readonly("pending_quality", &env::FactoryState::pending_quality)
      .def_readonly("input_precision", &env::FactoryState::input_precision);

  py::class_<env::StepOutcome>(m, "StepOutcome")
      .def_readonly("next", &env::StepOutcome::next)
      .def_readonly("observations", &env::StepOutcome::observations)
      .def_readonly("reward", &env::StepOutcome::reward)
      .def_readonly("done", &env::StepOutcome::done);

  py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>(), py::arg("seed"));

  m.def("reset",
        [](const env::FactoryConfig& c, Rng& rng) { return env::reset(c, rng); },
        py::arg("config"), py::arg("rng"));
  m.def("step",
        [](const env::FactoryConfig& c, const env::FactoryState& s,
           const std::vector<int>& actions, Rng& rng) {
          return env::step(c, s, to_actions(actions), rng);
        },
        py::arg("config"), py::arg("state"), py::arg("actions"), py::arg("rng"));
  m.def("state_vector", &env::state_vector, py::arg("config"), py::arg("state"));

  // qmac
  py::class_<qmac::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("actor_lr", &qmac::TrainConfig::actor_lr)
      .def_readwrite("critic_lr", &qmac::TrainConfig::critic_lr)
      .def_readwrite("weight_decay", &qmac::TrainConfig::weight_decay)
      .def_readwrite("gamma", &qmac::TrainConfig::gamma)
      .def_readwrite("beta_actor", &qmac::TrainConfig::beta_actor)
      .def_readwrite("beta_critic", &qmac::TrainConfig::beta_critic)
      .def_readwrite("target_update_period", &qmac::TrainConfig::target_update_period)
      .def_readwrite("max_epochs", &qmac::TrainConfig::max_epochs)
      .def_readwrite("eval_episodes", &qmac::TrainConfig::eval_episodes)
      .def_readwrite("seed", &qmac::TrainConfig::seed)
      .def_readwrite("init_scale", &qmac::TrainConfig::init_scale)
      .def("validate", &qmac::TrainConfig::validate);

  m.def("softmax_policy",
        [](const std::vector<double>& logits) {
          return qmac::softmax_policy(logits).probabilities;
        },
        py::arg("logits"));
  m.def("policy_distribution",
        [](const std::vector<double>& obs, const std::vector<double>& params) {
          return qmac::policy_distribution(obs, params).probabilities;
        },
        py::arg("observation"), py::arg("actor_params"));
  m.def("value_estimate",
        [](const std::vector<double>& s, const std::vector<double>& p) {
          return qmac::value_estimate(s, p);
        },
        py::arg("state_vars"), py::arg("critic_params"));

  py::class_<Scheme>(m, "Scheme")
      .def_readonly("name", &Scheme::name)
      .def_property_readonly("trainable", &Scheme::trainable)
      .def_property_readonly("actor_parameter_count",
                             [](const Scheme& s) { return s.actor->parameter_count(); })
      .def_property_readonly("critic_parameter_count", [](const Scheme& s) {
        return s.critic ? s.critic->parameter_count() : std::size_t{0};
      });

  m.def("make_scheme",
        [](const std::string& name, const env::FactoryConfig& c,
           const qmac::TrainConfig& t, double budget) {
          return bench::make_scheme(name, c, t, budget);
        },
        py::arg("name"), py::arg("env") = env::FactoryConfig{},
        py::arg("train") = qmac::TrainConfig{}, py::arg("budget") = 0.0);

  py::class_<qmac::TrainingResult>(m, "TrainingResult")
      .def_readonly("actor_params", &qmac::TrainingResult::actor_params)
      .def_readonly("critic_params", &qmac::TrainingResult::critic_params)
      .def_property_readonly("records", [](const qmac::TrainingResult& r) {
        return record_list(r.records);
      });

  m.def("train",
        [](const env::FactoryConfig& c, const qmac::TrainConfig& t, const Scheme& s) {
          py::gil_scoped_release release;
          return qmac::train(c, t, s);
        },
        py::arg("env"), py::arg("train"), py::arg("scheme"));
  m.def("evaluate",
        [](const env::FactoryConfig& c, const Scheme& s, const std::vector<double>& p,
           int episodes, std::uint64_t seed) {
          return record_list(qmac::evaluate(c, s, p, episodes, seed));
        },
        py::arg("env"), py::arg("scheme"), py::arg("actor_params"),
        py::arg("episodes"), py::arg("seed"));

  // bench
  m.def("encoding_benchmark",
        [](int budget, int iterations, double learning_rate,
           const std::vector<std::uint64_t>& seeds, double bit_angle) {
          bench::EncodeBenchConfig c;
          c.iterations = iterations;
          c.learning_rate = learning_rate;
          c.seeds = seeds;
          c.bit_angle = bit_angle;
          std::vector<bench::EncodingRun> runs;
          {
            py::gil_scoped_release release;
            runs = bench::encoding_benchmark(budget, c);
          }
          py::list out;
          for (const auto& r : runs) {
            py::dict d;
            d["encoding"] = std::string(bench::encoding_name(r.encoding));
            d["seed"] = r.seed;
            d["mse"] = r.mse;
            out.append(d);
          }
          return out;
        },
        py::arg("budget") = 50, py::arg("iterations") = 500,
        py::arg("learning_rate") = 0.05,
        py::arg("seeds") = std::vector<std::uint64_t>{0, 1, 2, 3, 4},
        py::arg("bit_angle") = bench::kDefaultBitAngle);

  py::class_<bench::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("scheme", &bench::ExperimentConfig::scheme)
      .def_readwrite("seeds", &bench::ExperimentConfig::seeds)
      .def_readwrite("env", &bench::ExperimentConfig::env)
      .def_readwrite("train", &bench::ExperimentConfig::train)
      .def_readwrite("out", &bench::ExperimentConfig::out)
      .def("set",
           [](bench::ExperimentConfig& c, const std::string& key, const std::string& value) {
             bench::apply_setting(c, key, value);
           },
           py::arg("key"), py::arg("value"))
      .def("validate", &bench::ExperimentConfig::validate);

  m.def("parse_config",
        [](const std::string& text, const std::filesystem::path& base_dir) {
          return bench::parse_config(text, base_dir);
        },
        py::arg("text"), py::arg("base_dir") = std::filesystem::path("."));
  m.def("load_config", &bench::load_config, py::arg("path"));
  m.def("config_keys", &bench::config_keys);
  m.def("run_experiment",
        [](const bench::ExperimentConfig& c) {
          py::gil_scoped_release release;
          return bench::run_experiment(c).metrics_files;
        },
        py::arg("config"));
  m.def("read_metrics",
        [](const std::filesystem::path& p) { return record_list(read_metrics(p)); },
        py::arg("path"));
  m.def("summary_table", [](const std::vector<std::filesystem::path>& files) {
    std::ostringstream out;
    bench::write_summary_table(out, bench::summarize(files));
    return out.str();
  });
}
