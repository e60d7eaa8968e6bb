#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Dense statevector simulation for small registers.
//
// Wire w is bit w of the basis index (wire 0 is the least significant bit).
// Rotations follow R_P(d) = exp(-i d P / 2).

namespace qmarl::qsim {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 12;

enum class GateKind { X, Y, Z, RX, RY, RZ, CZ, CNOT };

std::string to_string(GateKind kind);

bool is_rotation(GateKind kind);
bool is_controlled(GateKind kind);

struct GateSpec {
  GateKind kind = GateKind::X;
  int target = 0;
  std::optional<int> control;
  std::optional<double> angle;

  static GateSpec x(int target) { return {GateKind::X, target, {}, {}}; }
  static GateSpec y(int target) { return {GateKind::Y, target, {}, {}}; }
  static GateSpec z(int target) { return {GateKind::Z, target, {}, {}}; }
  static GateSpec rx(int target, double a) { return {GateKind::RX, target, {}, a}; }
  static GateSpec ry(int target, double a) { return {GateKind::RY, target, {}, a}; }
  static GateSpec rz(int target, double a) { return {GateKind::RZ, target, {}, a}; }
  static GateSpec cz(int control, int target) {
    return {GateKind::CZ, target, control, {}};
  }
  static GateSpec cnot(int control, int target) {
    return {GateKind::CNOT, target, control, {}};
  }

  bool operator==(const GateSpec&) const = default;
};

// The inverse gate: rotations negate their angle, the rest are involutions.
GateSpec inverse(const GateSpec& gate);

// Throws SpecError when the gate is malformed or does not fit `num_qubits`.
void validate(const GateSpec& gate, int num_qubits);

class StateVector {
 public:
  // |0...0> on `num_qubits` wires. Throws ConfigError outside [1, kMaxQubits].
  explicit StateVector(int num_qubits);

  // Takes ownership of explicit amplitudes. The length must be a power of two
  // and the vector normalized to within 1e-10.
  static StateVector from_amplitudes(std::vector<Amplitude> amplitudes);

  int num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  const Amplitude& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm_squared() const;

  // In-place application. The free functions below give value semantics on
  // top of these. The typed apply_* kernels skip validation.
  void apply(const GateSpec& gate);
  void apply_rx(int wire, double angle);
  void apply_ry(int wire, double angle);
  void apply_rz(int wire, double angle);
  void apply_cz(int control, int target);

  double expectation_z(int wire) const;

 private:
  StateVector() = default;
  void apply_single(int wire, Amplitude m00, Amplitude m01, Amplitude m10,
                    Amplitude m11);

  int num_qubits_ = 0;
  std::vector<Amplitude> amplitudes_;
};

StateVector new_zero_state(int num_qubits);

// U|psi> for the gate's matrix on its wires. Throws SpecError for a malformed
// gate.
StateVector apply_gate(StateVector state, const GateSpec& gate);

// Left-to-right fold of apply_gate. A failing gate is reported with its index.
StateVector apply_circuit(StateVector state, std::span<const GateSpec> gates);

// <psi| Z_wire |psi>.
double expectation_z(const StateVector& state, int wire);

}  // namespace qmarl::qsim
