#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles/density_matrix.hpp"
#include "qmarl/errors.hpp"
#include "qmarl/qsim.hpp"
#include "qmarl/random.hpp"

using namespace qmarl;
using namespace qmarl::qsim;
using std::numbers::pi;

namespace {

GateSpec random_gate(Rng& rng, int nq) {
  const auto kind = static_cast<GateKind>(uniform_index(rng, nq > 1 ? 8 : 6));
  const int t = static_cast<int>(uniform_index(rng, nq));
  switch (kind) {
    case GateKind::CZ:
    case GateKind::CNOT: {
      int c = static_cast<int>(uniform_index(rng, nq - 1));
      if (c >= t) ++c;
      return kind == GateKind::CZ ? GateSpec::cz(c, t) : GateSpec::cnot(c, t);
    }
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      return {kind, t, {}, uniform(rng, -2 * pi, 2 * pi)};
    default:
      return {kind, t, {}, {}};
  }
}

}  // namespace

TEST(QsimZeroState, Amplitudes) {
  const auto one = new_zero_state(1);
  ASSERT_EQ(one.dimension(), 2u);
  EXPECT_EQ(one[0], Amplitude(1.0));
  EXPECT_EQ(one[1], Amplitude(0.0));
  const auto two = new_zero_state(2);
  ASSERT_EQ(two.dimension(), 4u);
  EXPECT_EQ(two[0], Amplitude(1.0));
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(two[i], Amplitude(0.0));
  const auto eight = new_zero_state(8);
  EXPECT_EQ(eight.dimension(), 256u);
  EXPECT_EQ(eight[0], Amplitude(1.0));
}

TEST(QsimZeroState, RejectsOutOfRangeCounts) {
  EXPECT_THROW(new_zero_state(0), ConfigError);
  EXPECT_THROW(new_zero_state(kMaxQubits + 1), ConfigError);
  EXPECT_NO_THROW(new_zero_state(kMaxQubits));
}

TEST(QsimGate, RyPiFlipsZero) {
  const auto s = apply_gate(new_zero_state(1), GateSpec::ry(0, pi));
  EXPECT_NEAR(std::abs(s[0]), 0.0, 1e-15);
  EXPECT_NEAR(s[1].real(), 1.0, 1e-15);
  EXPECT_NEAR(s[1].imag(), 0.0, 1e-15);
}

TEST(QsimGate, CzNegatesOneOne) {
  auto s = apply_gate(new_zero_state(2), GateSpec::x(0));
  s = apply_gate(s, GateSpec::x(1));
  const auto out = apply_gate(s, GateSpec::cz(0, 1));
  EXPECT_EQ(out[3], Amplitude(-1.0));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out[i], Amplitude(0.0));
}

TEST(QsimGate, XSwapsAmplitudes) {
  const Amplitude a(0.6, 0.0), b(0.0, 0.8);
  const auto s = StateVector::from_amplitudes({a, b});
  const auto out = apply_gate(s, GateSpec::x(0));
  EXPECT_EQ(out[0], b);
  EXPECT_EQ(out[1], a);
}

TEST(QsimGate, ValueSemantics) {
  const auto s = new_zero_state(1);
  const auto out = apply_gate(s, GateSpec::x(0));
  EXPECT_EQ(s[0], Amplitude(1.0));
  EXPECT_EQ(out[1], Amplitude(1.0));
}

TEST(QsimGate, MalformedGatesThrowSpecError) {
  const auto s = new_zero_state(2);
  EXPECT_THROW(apply_gate(s, GateSpec{GateKind::RX, 0, {}, {}}), SpecError);
  EXPECT_THROW(apply_gate(s, GateSpec{GateKind::CZ, 1, {}, {}}), SpecError);
  EXPECT_THROW(apply_gate(s, GateSpec::cnot(1, 1)), SpecError);
  EXPECT_THROW(apply_gate(s, GateSpec::x(2)), SpecError);
  EXPECT_THROW(apply_gate(s, GateSpec::rx(0, NAN)), SpecError);
  EXPECT_THROW(apply_gate(s, GateSpec{GateKind::X, 0, 1, {}}), SpecError);
}

TEST(QsimCircuit, EmptyIsIdentity) {
  const auto s = apply_gate(new_zero_state(2), GateSpec::ry(1, 0.4));
  const auto out = apply_circuit(s, {});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out[i], s[i]);
}

TEST(QsimCircuit, HalfRotation) {
  const std::vector<GateSpec> gates{GateSpec::ry(0, pi / 2)};
  const auto out = apply_circuit(new_zero_state(1), gates);
  EXPECT_NEAR(out[0].real(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(out[1].real(), std::sqrt(0.5), 1e-15);
}

TEST(QsimCircuit, DoubleXIsIdentity) {
  const std::vector<GateSpec> gates{GateSpec::x(0), GateSpec::x(0)};
  const auto out = apply_circuit(new_zero_state(1), gates);
  EXPECT_EQ(out[0], Amplitude(1.0));
  EXPECT_EQ(out[1], Amplitude(0.0));
}

TEST(QsimCircuit, ErrorsCarryGateIndex) {
  const std::vector<GateSpec> gates{GateSpec::x(0), GateSpec::x(5)};
  try {
    apply_circuit(new_zero_state(2), gates);
    FAIL() << "expected SpecError";
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("gate 1"), std::string::npos);
  }
}

TEST(QsimExpectation, BasisStates) {
  EXPECT_EQ(expectation_z(new_zero_state(1), 0), 1.0);
  EXPECT_EQ(expectation_z(apply_gate(new_zero_state(1), GateSpec::x(0)), 0), -1.0);
  EXPECT_NEAR(expectation_z(apply_gate(new_zero_state(1), GateSpec::ry(0, pi / 2)), 0),
              0.0, 1e-12);
}

TEST(QsimExpectation, WireZeroIsLeastSignificantBit) {
  const auto s = apply_gate(new_zero_state(3), GateSpec::x(0));
  EXPECT_EQ(std::abs(s[1]), 1.0);
  EXPECT_EQ(expectation_z(s, 0), -1.0);
  EXPECT_EQ(expectation_z(s, 1), 1.0);
}

TEST(QsimProperty, NormConservation) {
  Rng rng(11);
  for (int c = 0; c < 1000; ++c) {
    const int nq = 1 + static_cast<int>(uniform_index(rng, 8));
    const int len = static_cast<int>(uniform_index(rng, 65));
    auto s = new_zero_state(nq);
    for (int g = 0; g < len; ++g) s.apply(random_gate(rng, nq));
    ASSERT_NEAR(s.norm_squared(), 1.0, 1e-10);
  }
}

TEST(QsimProperty, InverseRoundTrip) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int nq = 1 + static_cast<int>(uniform_index(rng, 5));
    auto s = new_zero_state(nq);
    for (int g = 0; g < 10; ++g) s.apply(random_gate(rng, nq));
    const GateSpec gate = random_gate(rng, nq);
    const auto back = apply_gate(apply_gate(s, gate), inverse(gate));
    for (std::size_t i = 0; i < s.dimension(); ++i) {
      ASSERT_NEAR(std::abs(back[i] - s[i]), 0.0, 1e-12);
    }
  }
}

TEST(QsimProperty, RyCosineLaw) {
  Rng rng(13);
  for (int k = 0; k < 100; ++k) {
    const double d = uniform(rng, -2 * pi, 2 * pi);
    const auto s = apply_gate(new_zero_state(1), GateSpec::ry(0, d));
    const double z = expectation_z(s, 0);
    ASSERT_NEAR(z, std::cos(d), 1e-12);
    ASSERT_LE(std::abs(z), 1.0 + 1e-15);
  }
}

TEST(QsimProperty, MatchesDensityMatrixOracle) {
  Rng rng(14);
  for (int trial = 0; trial < 60; ++trial) {
    const int nq = 1 + static_cast<int>(uniform_index(rng, 4));
    auto s = new_zero_state(nq);
    oracle::DensityMatrix rho(nq);
    for (int g = 0; g < 20; ++g) {
      const auto gate = random_gate(rng, nq);
      s.apply(gate);
      rho.apply(gate);
    }
    ASSERT_NEAR(rho.trace(), 1.0, 1e-10);
    for (int w = 0; w < nq; ++w) {
      const double z = expectation_z(s, w);
      ASSERT_NEAR(z, rho.expectation_z(w), 1e-10);
      ASSERT_LE(std::abs(z), 1.0 + 1e-12);
    }
  }
}

TEST(QsimGate, InverseRules) {
  EXPECT_EQ(inverse(GateSpec::rx(1, 0.3)), GateSpec::rx(1, -0.3));
  EXPECT_EQ(inverse(GateSpec::cz(0, 1)), GateSpec::cz(0, 1));
  EXPECT_EQ(inverse(GateSpec::y(0)), GateSpec::y(0));
}
