#include "hqfno/qsim.hpp"

#include <cmath>
#include <numbers>

namespace hqfno::qsim {
namespace {

constexpr double kPi = std::numbers::pi;

void check_qubit(int q, int n_qubits) {
  if (q < 0 || q >= n_qubits) {
    throw IndexError("qubit index " + std::to_string(q) + " out of range for " +
                     std::to_string(n_qubits) + " qubits");
  }
}

void check_gate(const GateOp& gate, int n_qubits) {
  for (int q : gate.qubits()) check_qubit(q, n_qubits);
  if (gate.arity() == 2 && gate.targets[0] == gate.targets[1]) {
    throw IndexError(to_string(gate.kind) + " targets must be distinct");
  }
  if (gate.has_angle() && !std::isfinite(gate.angle)) {
    throw DomainError(to_string(gate.kind) + " angle is not finite");
  }
}

// Applies a 2x2 matrix [[m00, m01], [m10, m11]] to qubit q.
void apply_single(std::span<Complex> amps, int q, Complex m00, Complex m01,
                  Complex m10, Complex m11) {
  const std::size_t stride = std::size_t{1} << q;
  const std::size_t dim = amps.size();
  for (std::size_t block = 0; block < dim; block += 2 * stride) {
    for (std::size_t i = block; i < block + stride; ++i) {
      const Complex a0 = amps[i];
      const Complex a1 = amps[i + stride];
      amps[i] = m00 * a0 + m01 * a1;
      amps[i + stride] = m10 * a0 + m11 * a1;
    }
  }
}

// Calls fn(i) for every index with both target bits clear.
template <typename Fn>
void for_each_pair_base(std::size_t dim, std::size_t m0, std::size_t m1, Fn&& fn) {
  const std::size_t both = m0 | m1;
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & both) == 0) fn(i);
  }
}

// Rotates the {|01>,|10>} pair: a' = c a + s b, b' = s a + c b.
void apply_exchange(std::span<Complex> amps, int q0, int q1, Complex c, Complex s) {
  const std::size_t m0 = std::size_t{1} << q0;
  const std::size_t m1 = std::size_t{1} << q1;
  for_each_pair_base(amps.size(), m0, m1, [&](std::size_t i) {
    const Complex a = amps[i | m1];  // |t0=0, t1=1>
    const Complex b = amps[i | m0];  // |t0=1, t1=0>
    amps[i | m1] = c * a + s * b;
    amps[i | m0] = s * a + c * b;
  });
}

void apply_hadamard(std::span<Complex> amps, int q) {
  const double h = 1.0 / std::numbers::sqrt2;
  apply_single(amps, q, h, h, h, -h);
}

void apply_rx(std::span<Complex> amps, int q, double a) {
  const double c = std::cos(a / 2.0);
  const Complex s{0.0, -std::sin(a / 2.0)};
  apply_single(amps, q, c, s, s, c);
}

void apply_rz(std::span<Complex> amps, int q, double a) {
  const Complex lo = std::polar(1.0, -a / 2.0);
  const Complex hi = std::polar(1.0, a / 2.0);
  const std::size_t stride = std::size_t{1} << q;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    amps[i] *= (i & stride) ? hi : lo;
  }
}

void apply_ising_xy(std::span<Complex> amps, int q0, int q1, double phi) {
  apply_exchange(amps, q0, q1, std::cos(phi / 2.0), Complex{0.0, std::sin(phi / 2.0)});
}

void apply_controlled_phase(std::span<Complex> amps, int q0, int q1, double phi) {
  const std::size_t both = (std::size_t{1} << q0) | (std::size_t{1} << q1);
  const Complex phase = std::polar(1.0, phi);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & both) == both) amps[i] *= phase;
  }
}

void apply_swap(std::span<Complex> amps, int q0, int q1) {
  const std::size_t m0 = std::size_t{1} << q0;
  const std::size_t m1 = std::size_t{1} << q1;
  for_each_pair_base(amps.size(), m0, m1,
                     [&](std::size_t i) { std::swap(amps[i | m0], amps[i | m1]); });
}

enum class PauliPair { XX, YY };

// exp(i s P/4) for P = XX or YY on the pair (q0, q1).
void apply_pauli_pair_rotation(std::span<Complex> amps, int q0, int q1, PauliPair pauli,
                               double s) {
  const double c = std::cos(s / 4.0);
  const Complex is{0.0, std::sin(s / 4.0)};
  const std::size_t m0 = std::size_t{1} << q0;
  const std::size_t m1 = std::size_t{1} << q1;
  // XX: |00><->|11>, |01><->|10>, all +1. YY: |00><->|11> with -1, |01><->|10> with +1.
  const double outer = pauli == PauliPair::XX ? 1.0 : -1.0;
  for_each_pair_base(amps.size(), m0, m1, [&](std::size_t i) {
    const Complex a00 = amps[i];
    const Complex a11 = amps[i | m0 | m1];
    amps[i] = c * a00 + is * outer * a11;
    amps[i | m0 | m1] = c * a11 + is * outer * a00;
  });
  apply_exchange(amps, q0, q1, c, is);
}

std::vector<double> weighted_z_diagonal(int n_qubits, std::span<const double> weights) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::vector<double> diag(dim, 0.0);
  for (std::size_t b = 0; b < dim; ++b) {
    double v = 0.0;
    for (int j = 0; j < n_qubits; ++j) v += ((b >> j) & 1U) ? -weights[j] : weights[j];
    diag[b] = v;
  }
  return diag;
}

double inner_real(std::span<const Complex> bra, std::span<const Complex> ket) {
  double acc = 0.0;
  for (std::size_t i = 0; i < bra.size(); ++i) acc += (std::conj(bra[i]) * ket[i]).real();
  return acc;
}

// Runs `circuit` on `input`, inserting exp(i s P/4) right after op `insert_at`.
std::vector<double> run_with_pauli_insert(const CircuitSpec& circuit, const Statevector& input,
                                          std::size_t insert_at, PauliPair pauli, double s) {
  Statevector state = input;
  for (std::size_t k = 0; k < circuit.ops.size(); ++k) {
    apply_gate(state, circuit.ops[k]);
    if (k == insert_at) {
      const auto& op = circuit.ops[k];
      apply_pauli_pair_rotation(state.amplitudes(), op.targets[0], op.targets[1], pauli, s);
    }
  }
  return expect_z_all(state);
}

std::vector<double> expect_with_angle(CircuitSpec& circuit, const Statevector& input,
                                      std::size_t op_index, double angle) {
  const double saved = circuit.ops[op_index].angle;
  circuit.ops[op_index].angle = angle;
  auto z = expect_z_all(run(circuit, input));
  circuit.ops[op_index].angle = saved;
  return z;
}

}  // namespace

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RZ: return "RZ";
    case GateKind::IsingXY: return "IsingXY";
    case GateKind::Hadamard: return "Hadamard";
    case GateKind::ControlledPhase: return "ControlledPhase";
    case GateKind::Swap: return "Swap";
  }
  return "?";
}

int GateOp::arity() const noexcept {
  switch (kind) {
    case GateKind::IsingXY:
    case GateKind::ControlledPhase:
    case GateKind::Swap:
      return 2;
    default:
      return 1;
  }
}

bool GateOp::has_angle() const noexcept {
  return kind != GateKind::Hadamard && kind != GateKind::Swap;
}

bool GateOp::differentiable() const noexcept {
  return kind == GateKind::RX || kind == GateKind::RZ || kind == GateKind::IsingXY;
}

void CircuitSpec::append(const GateOp& op, bool is_trainable) {
  ops.push_back(op);
  trainable.push_back(is_trainable);
}

void CircuitSpec::append(const CircuitSpec& other) {
  ops.insert(ops.end(), other.ops.begin(), other.ops.end());
  trainable.insert(trainable.end(), other.trainable.begin(), other.trainable.end());
}

std::size_t CircuitSpec::trainable_count() const {
  std::size_t n = 0;
  for (bool t : trainable) n += t ? 1 : 0;
  return n;
}

std::vector<std::size_t> CircuitSpec::trainable_ops() const {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < trainable.size(); ++k) {
    if (trainable[k]) idx.push_back(k);
  }
  return idx;
}

std::vector<double> CircuitSpec::trainable_angles() const {
  std::vector<double> angles;
  for (std::size_t k : trainable_ops()) angles.push_back(ops[k].angle);
  return angles;
}

void CircuitSpec::set_trainable_angles(std::span<const double> angles) {
  const auto idx = trainable_ops();
  if (angles.size() != idx.size()) {
    throw ShapeError("expected " + std::to_string(idx.size()) + " trainable angles, got " +
                     std::to_string(angles.size()));
  }
  for (std::size_t i = 0; i < idx.size(); ++i) ops[idx[i]].angle = angles[i];
}

void CircuitSpec::validate() const {
  if (n_qubits < 1) throw DomainError("circuit needs at least one qubit");
  if (trainable.size() != ops.size()) {
    throw ShapeError("trainable mask length does not match op count");
  }
  for (std::size_t k = 0; k < ops.size(); ++k) {
    check_gate(ops[k], n_qubits);
    if (trainable[k] && !ops[k].differentiable()) {
      throw ConfigError(to_string(ops[k].kind) + " cannot be trainable");
    }
  }
}

Statevector::Statevector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > 30) throw DomainError("unsupported qubit count");
  amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amps_[0] = 1.0;
}

Statevector::Statevector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (n_qubits < 1 || n_qubits > 30) throw DomainError("unsupported qubit count");
  if (amps_.size() != (std::size_t{1} << n_qubits)) {
    throw ShapeError("amplitude vector length must be 2^n_qubits");
  }
}

Statevector Statevector::basis(int n_qubits, std::uint64_t index) {
  Statevector s(n_qubits);
  if (index >= s.dimension()) throw IndexError("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

double Statevector::norm() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

std::vector<double> Statevector::probabilities() const {
  std::vector<double> p(amps_.size());
  for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
  return p;
}

void apply_gate(std::span<Complex> amps, int n_qubits, const GateOp& gate) {
  check_gate(gate, n_qubits);
  const int q0 = gate.targets[0];
  const int q1 = gate.targets[1];
  switch (gate.kind) {
    case GateKind::RX: apply_rx(amps, q0, gate.angle); break;
    case GateKind::RZ: apply_rz(amps, q0, gate.angle); break;
    case GateKind::IsingXY: apply_ising_xy(amps, q0, q1, gate.angle); break;
    case GateKind::Hadamard: apply_hadamard(amps, q0); break;
    case GateKind::ControlledPhase: apply_controlled_phase(amps, q0, q1, gate.angle); break;
    case GateKind::Swap: apply_swap(amps, q0, q1); break;
  }
}

void apply_gate_adjoint(std::span<Complex> amps, int n_qubits, const GateOp& gate) {
  GateOp inverse = gate;
  if (gate.has_angle()) inverse.angle = -gate.angle;
  apply_gate(amps, n_qubits, inverse);
}

void apply_gate(Statevector& state, const GateOp& gate) {
  apply_gate(state.amplitudes(), state.n_qubits(), gate);
}

void apply_gate_adjoint(Statevector& state, const GateOp& gate) {
  apply_gate_adjoint(state.amplitudes(), state.n_qubits(), gate);
}

void apply_derivative_generator(Statevector& state, const GateOp& gate) {
  check_gate(gate, state.n_qubits());
  auto amps = state.amplitudes();
  const Complex minus_half_i{0.0, -0.5};
  switch (gate.kind) {
    case GateKind::RX:
      apply_single(amps, gate.targets[0], 0.0, minus_half_i, minus_half_i, 0.0);
      break;
    case GateKind::RZ:
      apply_single(amps, gate.targets[0], minus_half_i, 0.0, 0.0, -minus_half_i);
      break;
    case GateKind::IsingXY: {
      // -i * (-(XX+YY)/4) = (i/2) on the {|01>,|10>} exchange, zero elsewhere.
      const std::size_t m0 = std::size_t{1} << gate.targets[0];
      const std::size_t m1 = std::size_t{1} << gate.targets[1];
      for_each_pair_base(amps.size(), m0, m1, [&](std::size_t i) {
        amps[i] = 0.0;
        amps[i | m0 | m1] = 0.0;
      });
      apply_exchange(amps, gate.targets[0], gate.targets[1], 0.0, Complex{0.0, 0.5});
      break;
    }
    default:
      throw ConfigError(to_string(gate.kind) + " has no derivative generator");
  }
}

Statevector run(const CircuitSpec& circuit, Statevector state) {
  if (state.n_qubits() != circuit.n_qubits) {
    throw ShapeError("state and circuit qubit counts differ");
  }
  for (const auto& op : circuit.ops) apply_gate(state, op);
  return state;
}

Statevector run(const CircuitSpec& circuit) {
  return run(circuit, Statevector(circuit.n_qubits));
}

CircuitSpec build_qft(int n_qubits) {
  if (n_qubits < 1) throw DomainError("QFT needs at least one qubit");
  CircuitSpec c;
  c.n_qubits = n_qubits;
  for (int t = n_qubits - 1; t >= 0; --t) {
    c.append(GateOp::hadamard(t));
    for (int ctrl = t - 1; ctrl >= 0; --ctrl) {
      c.append(GateOp::controlled_phase(ctrl, t, kPi / static_cast<double>(1 << (t - ctrl))));
    }
  }
  for (int q = 0; q < n_qubits / 2; ++q) c.append(GateOp::swap(q, n_qubits - 1 - q));
  return c;
}

CircuitSpec build_inverse_qft(int n_qubits) {
  const CircuitSpec forward = build_qft(n_qubits);
  CircuitSpec c;
  c.n_qubits = n_qubits;
  for (auto it = forward.ops.rbegin(); it != forward.ops.rend(); ++it) {
    GateOp op = *it;
    if (op.has_angle()) op.angle = -op.angle;
    c.append(op);
  }
  return c;
}

std::vector<double> expect_z_all(const Statevector& state) {
  const int n = state.n_qubits();
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < state.dimension(); ++b) {
    const double p = std::norm(state[b]);
    total += p;
    for (int j = 0; j < n; ++j) z[j] += ((b >> j) & 1U) ? -p : p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw NumericError("statevector probabilities sum to " + std::to_string(total));
  }
  return z;
}

std::array<std::array<Complex, 4>, 4> ising_xy_matrix(double phi) {
  const Complex c = std::cos(phi / 2.0);
  const Complex is{0.0, std::sin(phi / 2.0)};
  return {{{1.0, 0.0, 0.0, 0.0}, {0.0, c, is, 0.0}, {0.0, is, c, 0.0}, {0.0, 0.0, 0.0, 1.0}}};
}

std::vector<double> adjoint_angle_gradients(const CircuitSpec& circuit,
                                            const Statevector& input,
                                            std::span<const double> z_weights) {
  if (z_weights.size() != static_cast<std::size_t>(circuit.n_qubits)) {
    throw ShapeError("observable weight count must equal qubit count");
  }
  Statevector psi = run(circuit, input);
  Statevector lambda = psi;
  const auto diag = weighted_z_diagonal(circuit.n_qubits, z_weights);
  for (std::size_t b = 0; b < lambda.dimension(); ++b) lambda[b] *= diag[b];

  std::vector<double> grads(circuit.ops.size(), 0.0);
  Statevector mu(circuit.n_qubits);
  for (std::size_t k = circuit.ops.size(); k-- > 0;) {
    const GateOp& op = circuit.ops[k];
    if (op.differentiable()) {
      mu = psi;
      apply_derivative_generator(mu, op);
      grads[k] = 2.0 * inner_real(lambda.amplitudes(), mu.amplitudes());
    }
    apply_gate_adjoint(psi, op);
    apply_gate_adjoint(lambda, op);
  }
  return grads;
}

Jacobian circuit_gradients(const CircuitSpec& circuit, const Statevector& input,
                           const GradientOptions& options) {
  circuit.validate();
  const auto params = circuit.trainable_ops();
  const auto n = static_cast<std::size_t>(circuit.n_qubits);
  Jacobian jac{n, params.size(), std::vector<double>(n * params.size(), 0.0)};

  switch (options.method) {
    case GradientMethod::Adjoint: {
      std::vector<double> weights(n, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        std::fill(weights.begin(), weights.end(), 0.0);
        weights[j] = 1.0;
        const auto g = adjoint_angle_gradients(circuit, input, weights);
        for (std::size_t p = 0; p < params.size(); ++p) jac(j, p) = g[params[p]];
      }
      break;
    }
    case GradientMethod::ParameterShift: {
      CircuitSpec work = circuit;
      for (std::size_t p = 0; p < params.size(); ++p) {
        const std::size_t k = params[p];
        const GateOp& op = circuit.ops[k];
        std::vector<double> d(n, 0.0);
        if (op.kind == GateKind::IsingXY) {
          if (!options.decompose_ising_xy) {
            throw ConfigError("parameter-shift on IsingXY requires decomposition");
          }
          for (PauliPair pauli : {PauliPair::XX, PauliPair::YY}) {
            const auto plus = run_with_pauli_insert(circuit, input, k, pauli, kPi);
            const auto minus = run_with_pauli_insert(circuit, input, k, pauli, -kPi);
            for (std::size_t j = 0; j < n; ++j) d[j] += (plus[j] - minus[j]) / 4.0;
          }
        } else {
          const auto plus = expect_with_angle(work, input, k, op.angle + kPi / 2.0);
          const auto minus = expect_with_angle(work, input, k, op.angle - kPi / 2.0);
          for (std::size_t j = 0; j < n; ++j) d[j] = (plus[j] - minus[j]) / 2.0;
        }
        for (std::size_t j = 0; j < n; ++j) jac(j, p) = d[j];
      }
      break;
    }
    case GradientMethod::FiniteDifference: {
      CircuitSpec work = circuit;
      const double h = options.fd_step;
      for (std::size_t p = 0; p < params.size(); ++p) {
        const std::size_t k = params[p];
        const double a = circuit.ops[k].angle;
        const auto plus = expect_with_angle(work, input, k, a + h);
        const auto minus = expect_with_angle(work, input, k, a - h);
        for (std::size_t j = 0; j < n; ++j) jac(j, p) = (plus[j] - minus[j]) / (2.0 * h);
      }
      break;
    }
  }
  return jac;
}

std::vector<Statevector> trainable_state_derivatives(const CircuitSpec& circuit,
                                                     const Statevector& input) {
  const auto params = circuit.trainable_ops();
  std::vector<Statevector> out;
  out.reserve(params.size());
  for (std::size_t k : params) {
    Statevector s = input;
    for (std::size_t i = 0; i < circuit.ops.size(); ++i) {
      apply_gate(s, circuit.ops[i]);
      if (i == k) apply_derivative_generator(s, circuit.ops[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hqfno::qsim
