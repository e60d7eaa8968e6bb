#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmarl/qsim.hpp"

// Variational circuits: encoders, the fixed parameterized template, Pauli-Z
// readout, and parameter-shift differentiation.

namespace qmarl::vqc {

enum class Axis { X, Y, Z };

enum class Role { Actor, Critic };

// One trainable rotation. Its parameter index is its position in the layout's
// slot order: blocks first (in order), then the trailing layer.
struct RotationSlot {
  int wire = 0;
  Axis axis = Axis::Y;
  bool operator==(const RotationSlot&) const = default;
};

// A rotation layer optionally followed by a ring of CZ gates
// (w, (w + 1) mod n) over all wires.
struct Block {
  std::vector<RotationSlot> rotations;
  bool entangle = true;
  bool operator==(const Block&) const = default;
};

using ParamVector = std::vector<double>;
using ObservableVector = std::vector<double>;

class CircuitLayout {
 public:
  CircuitLayout(int num_qubits, std::vector<Block> blocks,
                std::vector<RotationSlot> trailing,
                std::vector<int> measured_wires);

  int num_qubits() const { return num_qubits_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<RotationSlot>& trailing() const { return trailing_; }
  const std::vector<int>& measured_wires() const { return measured_; }
  std::size_t parameter_count() const { return slots_.size(); }
  std::size_t observable_count() const { return measured_.size(); }

  // Slot i in parameter order.
  const RotationSlot& slot(std::size_t i) const { return slots_[i]; }

  // The concrete gate list for `params`. Throws ContractError on a length
  // mismatch.
  std::vector<qsim::GateSpec> gates(std::span<const double> params) const;

  // Line-oriented text form, one gate per line; see parse_layout.
  std::string describe() const;

  bool operator==(const CircuitLayout& other) const;

 private:
  int num_qubits_;
  std::vector<Block> blocks_;
  std::vector<RotationSlot> trailing_;
  std::vector<int> measured_;
  std::vector<RotationSlot> slots_;
};

// Inverse of CircuitLayout::describe.
CircuitLayout parse_layout(std::string_view text);

// The CZ pairs of the ring entangler on n wires (none for n == 1, a single
// pair for n == 2).
std::vector<std::pair<int, int>> cz_ring(int num_qubits);

// Full rotation layer (RX, RY, RZ on every wire) + CZ ring.
Block full_block(int num_qubits);

// 8 qubits, two full blocks and a trailing RY on wires 0-5: 54 parameters.
// The actor reads Z on wires 0-4, the critic on wire 0.
CircuitLayout default_layout(Role role);

// Same template as default_layout(Actor) with `num_actions` measured wires.
CircuitLayout actor_layout(int num_actions);

inline constexpr int kDefaultQubits = 8;

// Maps a value normalized to [0, 1] onto an RY/RX angle in [0, pi]. Values
// outside the interval are clamped.
double to_angle(double normalized);
std::vector<double> to_angles(std::span<const double> normalized);

// RY(angles[k]) on wire k of |0...0>.
qsim::StateVector encode_actor_observation(std::span<const double> angles,
                                           int num_qubits);

// Wire k receives RX(angles[2k]) then RY(angles[2k+1]); an odd trailing entry
// gets a lone RX.
qsim::StateVector encode_critic_state(std::span<const double> angles,
                                      int num_qubits);

// Applies the layout to `encoded` and reads <Z> on each measured wire.
ObservableVector evaluate_observables(const CircuitLayout& layout,
                                      std::span<const double> params,
                                      const qsim::StateVector& encoded);

// d observable_j / d param_i, stored row-major as [observable][param].
struct Jacobian {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  double operator()(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }
};

// Parameter-shift Jacobian: 1/2 (O(p + pi/2 e_i) - O(p - pi/2 e_i)).
// Exactly 2 * parameter_count circuit evaluations.
Jacobian parameter_shift_jacobian(const CircuitLayout& layout,
                                  std::span<const double> params,
                                  const qsim::StateVector& encoded);

// upstream^T J: the gradient of sum_j upstream[j] * O_j.
ParamVector parameter_shift_gradient(const CircuitLayout& layout,
                                     std::span<const double> params,
                                     const qsim::StateVector& encoded,
                                     std::span<const double> upstream);

inline constexpr double kShift = 1.5707963267948966;  // pi / 2

}  // namespace qmarl::vqc
