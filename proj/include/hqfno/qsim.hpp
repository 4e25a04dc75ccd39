#pragma once

// Exact statevector simulator for the gate set used by the spectral mixer.
//
// Bit ordering is little-endian: qubit q is bit q of the basis index, so
// qubit 0 is the least significant bit. All gates act in place on the dense
// amplitude vector with stride arithmetic.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hqfno/tensor.hpp"

namespace hqfno::qsim {

enum class GateKind { RX, RZ, IsingXY, Hadamard, ControlledPhase, Swap };

std::string to_string(GateKind kind);

/// One gate application. Rotation gates follow U(a) = exp(-i a G) with
/// G = X/2 (RX), Z/2 (RZ) and -(XX+YY)/4 (IsingXY). ControlledPhase applies
/// exp(i a) to |11>; its angle is fixed, never trainable.
struct GateOp {
  GateKind kind = GateKind::Hadamard;
  std::array<int, 2> targets{0, 0};
  double angle = 0.0;

  static GateOp rx(int q, double a) { return {GateKind::RX, {q, q}, a}; }
  static GateOp rz(int q, double a) { return {GateKind::RZ, {q, q}, a}; }
  static GateOp hadamard(int q) { return {GateKind::Hadamard, {q, q}, 0.0}; }
  static GateOp ising_xy(int q0, int q1, double phi) {
    return {GateKind::IsingXY, {q0, q1}, phi};
  }
  static GateOp controlled_phase(int control, int target, double phi) {
    return {GateKind::ControlledPhase, {control, target}, phi};
  }
  static GateOp swap(int q0, int q1) { return {GateKind::Swap, {q0, q1}, 0.0}; }

  int arity() const noexcept;
  bool has_angle() const noexcept;
  /// True for gates with a generator-based derivative (RX, RZ, IsingXY).
  bool differentiable() const noexcept;
  std::span<const int> qubits() const noexcept {
    return {targets.data(), static_cast<std::size_t>(arity())};
  }
};

/// Ordered gate list. `trainable` has one flag per op; only
/// differentiable ops may be flagged.
struct CircuitSpec {
  int n_qubits = 0;
  std::vector<GateOp> ops;
  std::vector<bool> trainable;

  void append(const GateOp& op, bool is_trainable = false);
  void append(const CircuitSpec& other);
  std::size_t trainable_count() const;
  /// Op indices of trainable gates, in circuit order.
  std::vector<std::size_t> trainable_ops() const;
  std::vector<double> trainable_angles() const;
  void set_trainable_angles(std::span<const double> angles);
  /// Throws IndexError / DomainError / ShapeError on malformed circuits.
  void validate() const;
};

class Statevector {
 public:
  explicit Statevector(int n_qubits);  // |0...0>
  Statevector(int n_qubits, std::vector<Complex> amplitudes);

  static Statevector basis(int n_qubits, std::uint64_t index);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dimension() const noexcept { return amps_.size(); }
  std::span<Complex> amplitudes() noexcept { return amps_; }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  Complex& operator[](std::size_t i) noexcept { return amps_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return amps_[i]; }
  double norm() const;
  std::vector<double> probabilities() const;

 private:
  int n_qubits_;
  std::vector<Complex> amps_;
};

/// Gate kernels on a raw amplitude vector over `n_qubits` qubits. Exposed
/// so the density-matrix code can reuse them on its doubled register.
void apply_gate(std::span<Complex> amps, int n_qubits, const GateOp& gate);
void apply_gate_adjoint(std::span<Complex> amps, int n_qubits, const GateOp& gate);

void apply_gate(Statevector& state, const GateOp& gate);
void apply_gate_adjoint(Statevector& state, const GateOp& gate);
/// psi <- (-i G) psi, the derivative generator of a rotation gate.
void apply_derivative_generator(Statevector& state, const GateOp& gate);

Statevector run(const CircuitSpec& circuit, Statevector state);
Statevector run(const CircuitSpec& circuit);

/// Textbook QFT: Hadamard + controlled-phase cascade followed by the
/// reversal swap network. With little-endian ordering it maps
/// |j> to 2^{-n/2} sum_k exp(2 pi i j k / 2^n) |k>.
CircuitSpec build_qft(int n_qubits);
/// Exact adjoint of build_qft: reversed ops with negated phases.
CircuitSpec build_inverse_qft(int n_qubits);

/// <Z_j> for every qubit j.
std::vector<double> expect_z_all(const Statevector& state);

/// Dense 4x4 IsingXY unitary in the local basis |t0 t1> = |00>,|01>,|10>,|11>.
std::array<std::array<Complex, 4>, 4> ising_xy_matrix(double phi);

enum class GradientMethod { Adjoint, ParameterShift, FiniteDifference };

struct GradientOptions {
  GradientMethod method = GradientMethod::Adjoint;
  double fd_step = 1e-4;
  // IsingXY has a three-level generator; parameter-shift handles it through
  // XY(phi) = exp(i phi XX/4) exp(i phi YY/4), shifting each factor by +-pi.
  bool decompose_ising_xy = true;
};

/// Row-major dense matrix of d<Z_j>/d(theta_k).
struct Jacobian {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// d<Z_j>/d(angle) for every trainable op. Throws ConfigError for
/// parameter-shift on IsingXY when decomposition is disabled.
Jacobian circuit_gradients(const CircuitSpec& circuit, const Statevector& input,
                           const GradientOptions& options = {});

/// One adjoint sweep for the observable sum_j weights[j] Z_j. Returns the
/// derivative with respect to the angle of every differentiable op
/// (trainable or not), indexed by op position; zero for other ops.
std::vector<double> adjoint_angle_gradients(const CircuitSpec& circuit,
                                            const Statevector& input,
                                            std::span<const double> z_weights);

/// d|psi>/d(theta_k) for each trainable op k, exact.
std::vector<Statevector> trainable_state_derivatives(const CircuitSpec& circuit,
                                                     const Statevector& input);

}  // namespace hqfno::qsim
