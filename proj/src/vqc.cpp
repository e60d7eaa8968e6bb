#include "qmarl/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "qmarl/errors.hpp"

namespace qmarl::vqc {

namespace {

char axis_char(Axis a) {
  switch (a) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  return '?';
}

Axis parse_axis(std::string_view s) {
  if (s == "X") return Axis::X;
  if (s == "Y") return Axis::Y;
  if (s == "Z") return Axis::Z;
  throw ParseError("unknown rotation axis '" + std::string(s) + "'");
}

void apply_rotation(qsim::StateVector& state, const RotationSlot& slot,
                    double angle) {
  switch (slot.axis) {
    case Axis::X: state.apply_rx(slot.wire, angle); break;
    case Axis::Y: state.apply_ry(slot.wire, angle); break;
    case Axis::Z: state.apply_rz(slot.wire, angle); break;
  }
}

// Flattened circuit: rotation ops carry their slot index, CZ ops carry -1.
struct Op {
  int slot;
  int a;
  int b;
};

std::vector<Op> flatten(const CircuitLayout& layout) {
  std::vector<Op> ops;
  int slot = 0;
  const auto ring = cz_ring(layout.num_qubits());
  for (const auto& block : layout.blocks()) {
    for (std::size_t i = 0; i < block.rotations.size(); ++i) {
      ops.push_back({slot++, 0, 0});
    }
    if (block.entangle) {
      for (auto [c, t] : ring) ops.push_back({-1, c, t});
    }
  }
  for (std::size_t i = 0; i < layout.trailing().size(); ++i) {
    ops.push_back({slot++, 0, 0});
  }
  return ops;
}

void run_ops(qsim::StateVector& state, const CircuitLayout& layout,
             std::span<const Op> ops, std::span<const double> params) {
  for (const auto& op : ops) {
    if (op.slot >= 0) {
      apply_rotation(state, layout.slot(op.slot), params[op.slot]);
    } else {
      state.apply_cz(op.a, op.b);
    }
  }
}

void read_out(const qsim::StateVector& state, const CircuitLayout& layout,
              double* out) {
  for (std::size_t j = 0; j < layout.observable_count(); ++j) {
    out[j] = state.expectation_z(layout.measured_wires()[j]);
  }
}

void check_inputs(const CircuitLayout& layout, std::span<const double> params,
                  const qsim::StateVector& encoded) {
  if (params.size() != layout.parameter_count()) {
    throw SpecError("parameter count " + std::to_string(params.size()) +
                    " does not match layout (" +
                    std::to_string(layout.parameter_count()) + ")");
  }
  if (encoded.num_qubits() != layout.num_qubits()) {
    throw SpecError("encoded register has " +
                    std::to_string(encoded.num_qubits()) +
                    " qubits, layout expects " +
                    std::to_string(layout.num_qubits()));
  }
  for (double p : params) {
    if (!std::isfinite(p)) throw NumericError("non-finite circuit parameter");
  }
}

}  // namespace

std::vector<std::pair<int, int>> cz_ring(int num_qubits) {
  std::vector<std::pair<int, int>> pairs;
  if (num_qubits == 2) {
    pairs.emplace_back(0, 1);
  } else if (num_qubits > 2) {
    for (int w = 0; w < num_qubits; ++w) {
      pairs.emplace_back(w, (w + 1) % num_qubits);
    }
  }
  return pairs;
}

Block full_block(int num_qubits) {
  Block b;
  for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
    for (int w = 0; w < num_qubits; ++w) b.rotations.push_back({w, axis});
  }
  b.entangle = true;
  return b;
}

CircuitLayout::CircuitLayout(int num_qubits, std::vector<Block> blocks,
                             std::vector<RotationSlot> trailing,
                             std::vector<int> measured_wires)
    : num_qubits_(num_qubits),
      blocks_(std::move(blocks)),
      trailing_(std::move(trailing)),
      measured_(std::move(measured_wires)) {
  if (num_qubits_ < 1 || num_qubits_ > qsim::kMaxQubits) {
    throw ConfigError("layout qubit count out of range");
  }
  auto check = [&](const RotationSlot& s) {
    if (s.wire < 0 || s.wire >= num_qubits_) {
      throw SpecError("rotation slot wire " + std::to_string(s.wire) +
                      " out of range");
    }
    slots_.push_back(s);
  };
  for (auto& b : blocks_) {
    if (num_qubits_ == 1) b.entangle = false;
    for (const auto& s : b.rotations) check(s);
  }
  for (const auto& s : trailing_) check(s);
  std::set<int> seen;
  for (int w : measured_) {
    if (w < 0 || w >= num_qubits_) {
      throw SpecError("measured wire " + std::to_string(w) + " out of range");
    }
    if (!seen.insert(w).second) {
      throw SpecError("measured wire " + std::to_string(w) + " repeated");
    }
  }
  if (measured_.empty()) throw SpecError("layout measures no wires");
}

std::vector<qsim::GateSpec> CircuitLayout::gates(
    std::span<const double> params) const {
  if (params.size() != parameter_count()) {
    throw ContractError("parameter vector length does not match layout");
  }
  std::vector<qsim::GateSpec> out;
  const auto ring = cz_ring(num_qubits_);
  std::size_t slot = 0;
  auto emit = [&](const RotationSlot& s) {
    const double a = params[slot++];
    switch (s.axis) {
      case Axis::X: out.push_back(qsim::GateSpec::rx(s.wire, a)); break;
      case Axis::Y: out.push_back(qsim::GateSpec::ry(s.wire, a)); break;
      case Axis::Z: out.push_back(qsim::GateSpec::rz(s.wire, a)); break;
    }
  };
  for (const auto& b : blocks_) {
    for (const auto& s : b.rotations) emit(s);
    if (b.entangle) {
      for (auto [c, t] : ring) out.push_back(qsim::GateSpec::cz(c, t));
    }
  }
  for (const auto& s : trailing_) emit(s);
  return out;
}

std::string CircuitLayout::describe() const {
  std::ostringstream os;
  os << "qubits " << num_qubits_ << "\n";
  os << "params " << parameter_count() << "\n";
  os << "measured";
  for (int w : measured_) os << ' ' << w;
  os << "\n";
  std::size_t slot = 0;
  const auto ring = cz_ring(num_qubits_);
  for (const auto& b : blocks_) {
    os << "block\n";
    for (const auto& s : b.rotations) {
      os << "  rot slot=" << slot++ << " wire=" << s.wire
         << " axis=" << axis_char(s.axis) << "\n";
    }
    if (b.entangle) {
      for (auto [c, t] : ring) os << "  cz " << c << ' ' << t << "\n";
    }
  }
  if (!trailing_.empty()) {
    os << "trailing\n";
    for (const auto& s : trailing_) {
      os << "  rot slot=" << slot++ << " wire=" << s.wire
         << " axis=" << axis_char(s.axis) << "\n";
    }
  }
  os << "end\n";
  return os.str();
}

bool CircuitLayout::operator==(const CircuitLayout& other) const {
  return num_qubits_ == other.num_qubits_ && blocks_ == other.blocks_ &&
         trailing_ == other.trailing_ && measured_ == other.measured_;
}

CircuitLayout parse_layout(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int qubits = -1;
  long declared_params = -1;
  std::vector<int> measured;
  std::vector<Block> blocks;
  std::vector<RotationSlot> trailing;
  enum { kHeader, kBlock, kTrailing } section = kHeader;
  std::size_t next_slot = 0;
  int line_no = 0;
  bool ended = false;
  auto fail = [&](const std::string& msg) {
    throw ParseError("layout line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "qubits") {
      ls >> qubits;
    } else if (word == "params") {
      ls >> declared_params;
    } else if (word == "measured") {
      int w;
      while (ls >> w) measured.push_back(w);
    } else if (word == "block") {
      blocks.push_back(Block{{}, false});
      section = kBlock;
    } else if (word == "trailing") {
      section = kTrailing;
    } else if (word == "rot") {
      std::string kv;
      long slot = -1;
      int wire = -1;
      std::string axis;
      while (ls >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) fail("expected key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        try {
          if (key == "slot") slot = std::stol(val);
          else if (key == "wire") wire = std::stoi(val);
          else if (key == "axis") axis = val;
          else fail("unknown key '" + key + "'");
        } catch (const std::logic_error&) {
          fail("bad value for '" + key + "'");
        }
      }
      if (slot != static_cast<long>(next_slot)) fail("slot index out of order");
      ++next_slot;
      RotationSlot s{wire, parse_axis(axis)};
      if (section == kBlock) blocks.back().rotations.push_back(s);
      else if (section == kTrailing) trailing.push_back(s);
      else fail("rotation outside a block");
    } else if (word == "cz") {
      if (section != kBlock) fail("cz outside a block");
      blocks.back().entangle = true;
    } else if (word == "end") {
      ended = true;
      break;
    } else {
      fail("unexpected '" + word + "'");
    }
  }
  if (!ended) throw ParseError("layout: missing 'end'");
  if (qubits < 0) throw ParseError("layout: missing 'qubits'");
  CircuitLayout layout(qubits, std::move(blocks), std::move(trailing),
                       std::move(measured));
  if (declared_params >= 0 &&
      static_cast<std::size_t>(declared_params) != layout.parameter_count()) {
    throw ParseError("layout: declared params do not match slots");
  }
  return layout;
}

CircuitLayout actor_layout(int num_actions) {
  if (num_actions < 1 || num_actions > kDefaultQubits) {
    throw ConfigError("actor layout supports 1.." +
                      std::to_string(kDefaultQubits) + " actions");
  }
  std::vector<Block> blocks{full_block(kDefaultQubits),
                            full_block(kDefaultQubits)};
  std::vector<RotationSlot> trailing;
  for (int w = 0; w < 6; ++w) trailing.push_back({w, Axis::Y});
  std::vector<int> measured;
  for (int w = 0; w < num_actions; ++w) measured.push_back(w);
  return CircuitLayout(kDefaultQubits, std::move(blocks), std::move(trailing),
                       std::move(measured));
}

CircuitLayout default_layout(Role role) {
  if (role == Role::Actor) return actor_layout(5);
  std::vector<Block> blocks{full_block(kDefaultQubits),
                            full_block(kDefaultQubits)};
  std::vector<RotationSlot> trailing;
  for (int w = 0; w < 6; ++w) trailing.push_back({w, Axis::Y});
  return CircuitLayout(kDefaultQubits, std::move(blocks), std::move(trailing),
                       {0});
}

double to_angle(double normalized) {
  return std::clamp(normalized, 0.0, 1.0) * std::numbers::pi;
}

std::vector<double> to_angles(std::span<const double> normalized) {
  std::vector<double> out(normalized.size());
  std::transform(normalized.begin(), normalized.end(), out.begin(), to_angle);
  return out;
}

qsim::StateVector encode_actor_observation(std::span<const double> angles,
                                           int num_qubits) {
  if (angles.size() > static_cast<std::size_t>(num_qubits)) {
    throw EncodingError("observation of length " +
                        std::to_string(angles.size()) + " exceeds " +
                        std::to_string(num_qubits) + " qubits");
  }
  qsim::StateVector state(num_qubits);
  for (std::size_t k = 0; k < angles.size(); ++k) {
    if (!std::isfinite(angles[k])) throw NumericError("non-finite input angle");
    state.apply_ry(static_cast<int>(k), angles[k]);
  }
  return state;
}

qsim::StateVector encode_critic_state(std::span<const double> angles,
                                      int num_qubits) {
  if (angles.size() > 2 * static_cast<std::size_t>(num_qubits)) {
    throw EncodingError("state of length " + std::to_string(angles.size()) +
                        " exceeds 2 x " + std::to_string(num_qubits) +
                        " qubits");
  }
  qsim::StateVector state(num_qubits);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (!std::isfinite(angles[i])) throw NumericError("non-finite input angle");
    const int wire = static_cast<int>(i / 2);
    if (i % 2 == 0) state.apply_rx(wire, angles[i]);
    else state.apply_ry(wire, angles[i]);
  }
  return state;
}

ObservableVector evaluate_observables(const CircuitLayout& layout,
                                      std::span<const double> params,
                                      const qsim::StateVector& encoded) {
  check_inputs(layout, params, encoded);
  const auto ops = flatten(layout);
  qsim::StateVector state = encoded;
  run_ops(state, layout, ops, params);
  ObservableVector out(layout.observable_count());
  read_out(state, layout, out.data());
  return out;
}

Jacobian parameter_shift_jacobian(const CircuitLayout& layout,
                                  std::span<const double> params,
                                  const qsim::StateVector& encoded) {
  check_inputs(layout, params, encoded);
  const auto ops = flatten(layout);
  const std::size_t n_obs = layout.observable_count();
  Jacobian jac{n_obs, params.size(),
               std::vector<double>(n_obs * params.size(), 0.0)};
  std::vector<double> plus(n_obs), minus(n_obs);

  // Walk the circuit once; at each rotation branch off the shared prefix
  // state, apply the shifted rotation and run the rest of the circuit.
  qsim::StateVector prefix = encoded;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const Op& op = ops[k];
    if (op.slot < 0) {
      prefix.apply_cz(op.a, op.b);
      continue;
    }
    const auto& slot = layout.slot(op.slot);
    const double theta = params[op.slot];
    const auto suffix = std::span<const Op>(ops).subspan(k + 1);
    for (int sign : {+1, -1}) {
      qsim::StateVector branch = prefix;
      apply_rotation(branch, slot, theta + sign * kShift);
      run_ops(branch, layout, suffix, params);
      read_out(branch, layout, sign > 0 ? plus.data() : minus.data());
    }
    for (std::size_t j = 0; j < n_obs; ++j) {
      jac.values[j * jac.cols + op.slot] = 0.5 * (plus[j] - minus[j]);
    }
    apply_rotation(prefix, slot, theta);
  }
  return jac;
}

ParamVector parameter_shift_gradient(const CircuitLayout& layout,
                                     std::span<const double> params,
                                     const qsim::StateVector& encoded,
                                     std::span<const double> upstream) {
  if (upstream.size() != layout.observable_count()) {
    throw ContractError("upstream length does not match measured wires");
  }
  for (double u : upstream) {
    if (!std::isfinite(u)) throw NumericError("non-finite upstream cotangent");
  }
  ParamVector grad(params.size(), 0.0);
  const Jacobian jac = parameter_shift_jacobian(layout, params, encoded);
  for (std::size_t j = 0; j < jac.rows; ++j) {
    for (std::size_t i = 0; i < jac.cols; ++i) {
      grad[i] += upstream[j] * jac(j, i);
    }
  }
  return grad;
}

}  // namespace qmarl::vqc
