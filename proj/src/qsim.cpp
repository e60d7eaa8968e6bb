#include "qmarl/qsim.hpp"

#include <cmath>
#include <utility>

#include "qmarl/errors.hpp"

namespace qmarl::qsim {

namespace {

constexpr Amplitude kI{0.0, 1.0};

void check_wire(int wire, int num_qubits, const char* what) {
  if (wire < 0 || wire >= num_qubits) {
    throw SpecError(std::string(what) + " wire " + std::to_string(wire) +
                    " out of range for " + std::to_string(num_qubits) +
                    " qubits");
  }
}

}  // namespace

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CZ: return "CZ";
    case GateKind::CNOT: return "CNOT";
  }
  return "?";
}

bool is_rotation(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

bool is_controlled(GateKind kind) {
  return kind == GateKind::CZ || kind == GateKind::CNOT;
}

GateSpec inverse(const GateSpec& gate) {
  GateSpec inv = gate;
  if (is_rotation(gate.kind) && gate.angle) inv.angle = -*gate.angle;
  return inv;
}

void validate(const GateSpec& gate, int num_qubits) {
  check_wire(gate.target, num_qubits, "target");
  if (is_rotation(gate.kind)) {
    if (!gate.angle) {
      throw SpecError(to_string(gate.kind) + " gate requires an angle");
    }
    if (!std::isfinite(*gate.angle)) {
      throw SpecError(to_string(gate.kind) + " gate angle is not finite");
    }
  }
  if (is_controlled(gate.kind)) {
    if (!gate.control) {
      throw SpecError(to_string(gate.kind) + " gate requires a control wire");
    }
    check_wire(*gate.control, num_qubits, "control");
    if (*gate.control == gate.target) {
      throw SpecError(to_string(gate.kind) +
                      " gate control and target must differ");
    }
  } else if (gate.control) {
    throw SpecError(to_string(gate.kind) + " gate takes no control wire");
  }
}

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw ConfigError("qubit count " + std::to_string(num_qubits) +
                      " outside [1, " + std::to_string(kMaxQubits) + "]");
  }
  amplitudes_.assign(std::size_t{1} << num_qubits, Amplitude{});
  amplitudes_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(std::vector<Amplitude> amplitudes) {
  const std::size_t n = amplitudes.size();
  if (n < 2 || (n & (n - 1)) != 0) {
    throw ConfigError("amplitude count must be a power of two >= 2");
  }
  int q = 0;
  while ((std::size_t{1} << q) < n) ++q;
  if (q > kMaxQubits) throw ConfigError("too many qubits");
  StateVector s;
  s.num_qubits_ = q;
  s.amplitudes_ = std::move(amplitudes);
  if (std::abs(s.norm_squared() - 1.0) > 1e-10) {
    throw ConfigError("amplitudes are not normalized");
  }
  return s;
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  return total;
}

void StateVector::apply_single(int wire, Amplitude m00, Amplitude m01,
                               Amplitude m10, Amplitude m11) {
  const std::size_t stride = std::size_t{1} << wire;
  const std::size_t dim = amplitudes_.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Amplitude a0 = amplitudes_[i];
      const Amplitude a1 = amplitudes_[i + stride];
      amplitudes_[i] = m00 * a0 + m01 * a1;
      amplitudes_[i + stride] = m10 * a0 + m11 * a1;
    }
  }
}

void StateVector::apply_rx(int wire, double angle) {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  apply_single(wire, c, -kI * s, -kI * s, c);
}

void StateVector::apply_ry(int wire, double angle) {
  // Real-valued matrix; done without complex multiplies on the hot path.
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  const std::size_t stride = std::size_t{1} << wire;
  const std::size_t dim = amplitudes_.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Amplitude a0 = amplitudes_[i];
      const Amplitude a1 = amplitudes_[i + stride];
      amplitudes_[i] = c * a0 - s * a1;
      amplitudes_[i + stride] = s * a0 + c * a1;
    }
  }
}

void StateVector::apply_rz(int wire, double angle) {
  const Amplitude lo = std::polar(1.0, -angle / 2);
  const Amplitude hi = std::polar(1.0, angle / 2);
  const std::size_t mask = std::size_t{1} << wire;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    amplitudes_[i] *= (i & mask) ? hi : lo;
  }
}

void StateVector::apply_cz(int control, int target) {
  const std::size_t mask =
      (std::size_t{1} << control) | (std::size_t{1} << target);
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if ((i & mask) == mask) amplitudes_[i] = -amplitudes_[i];
  }
}

void StateVector::apply(const GateSpec& gate) {
  validate(gate, num_qubits_);
  switch (gate.kind) {
    case GateKind::X:
      apply_single(gate.target, 0.0, 1.0, 1.0, 0.0);
      break;
    case GateKind::Y:
      apply_single(gate.target, 0.0, -kI, kI, 0.0);
      break;
    case GateKind::Z:
      apply_single(gate.target, 1.0, 0.0, 0.0, -1.0);
      break;
    case GateKind::RX:
      apply_rx(gate.target, *gate.angle);
      break;
    case GateKind::RY:
      apply_ry(gate.target, *gate.angle);
      break;
    case GateKind::RZ:
      apply_rz(gate.target, *gate.angle);
      break;
    case GateKind::CZ:
      apply_cz(*gate.control, gate.target);
      break;
    case GateKind::CNOT: {
      const std::size_t cmask = std::size_t{1} << *gate.control;
      const std::size_t tmask = std::size_t{1} << gate.target;
      for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        if ((i & cmask) && !(i & tmask)) {
          std::swap(amplitudes_[i], amplitudes_[i | tmask]);
        }
      }
      break;
    }
  }
}

double StateVector::expectation_z(int wire) const {
  check_wire(wire, num_qubits_, "measured");
  const std::size_t mask = std::size_t{1} << wire;
  double total = 0.0;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    const double p = std::norm(amplitudes_[i]);
    total += (i & mask) ? -p : p;
  }
  return total;
}

StateVector new_zero_state(int num_qubits) { return StateVector(num_qubits); }

StateVector apply_gate(StateVector state, const GateSpec& gate) {
  state.apply(gate);
  return state;
}

StateVector apply_circuit(StateVector state, std::span<const GateSpec> gates) {
  for (std::size_t i = 0; i < gates.size(); ++i) {
    try {
      state.apply(gates[i]);
    } catch (const SpecError& e) {
      throw SpecError("gate " + std::to_string(i) + ": " + e.what());
    }
  }
  return state;
}

double expectation_z(const StateVector& state, int wire) {
  return state.expectation_z(wire);
}

}  // namespace qmarl::qsim
