#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hqfno/noise.hpp"
#include "oracles.hpp"

using namespace hqfno;
using namespace hqfno::noise;

namespace {

using oracle::Matrix;

Matrix outer(const std::vector<Complex>& v) {
  Matrix m(v.size(), std::vector<Complex>(v.size()));
  for (std::size_t r = 0; r < v.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c) m[r][c] = v[r] * std::conj(v[c]);
  return m;
}

Matrix mul(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  Matrix m(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) m[i][j] += a[i][k] * b[k][j];
  return m;
}

Matrix dagger(const Matrix& a) {
  Matrix m = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m[i][j] = std::conj(a[j][i]);
  return m;
}

// sum_k K rho K^dagger with single-qubit Kraus operators embedded on q.
Matrix kraus(const Matrix& rho, const std::vector<Matrix>& ks, int q, int n) {
  Matrix out(rho.size(), std::vector<Complex>(rho.size()));
  for (const auto& k : ks) {
    const auto e = oracle::embed(k, {q}, n);
    const auto t = mul(mul(e, rho), dagger(e));
    for (std::size_t i = 0; i < rho.size(); ++i)
      for (std::size_t j = 0; j < rho.size(); ++j) out[i][j] += t[i][j];
  }
  return out;
}

qsim::CircuitSpec sample_circuit() {
  qsim::CircuitSpec c;
  c.n_qubits = 3;
  c.append(qsim::GateOp::hadamard(0));
  c.append(qsim::GateOp::rx(1, 0.8));
  c.append(qsim::GateOp::ising_xy(0, 1, 1.3));
  c.append(qsim::GateOp::controlled_phase(1, 2, 0.6));
  c.append(qsim::GateOp::rz(2, -0.7));
  c.append(qsim::GateOp::swap(0, 2));
  return c;
}

}  // namespace

TEST_CASE("noiseless evolution equals the pure-state projector") {
  const auto c = sample_circuit();
  const auto rho = evolve(c, NoiseModel::ideal());
  const auto sv = qsim::run(c);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(rho.at(r, k) - sv[r] * std::conj(sv[k])) < 1e-13);
  CHECK(rho.trace() == doctest::Approx(1.0));
}

TEST_CASE("depolarizing matches its Pauli Kraus form") {
  std::mt19937_64 rng(1);
  const int n = 2;
  auto psi = oracle::random_state(n, rng);
  const double p = 0.2;
  DensityMatrix rho(n);
  // Prepare psi through a unitary circuit so both sides start equal.
  qsim::CircuitSpec prep;
  prep.n_qubits = n;
  prep.append(qsim::GateOp::hadamard(0));
  prep.append(qsim::GateOp::rx(1, 0.9));
  prep.append(qsim::GateOp::ising_xy(0, 1, 0.4));
  prep.append(qsim::GateOp::rz(0, 0.3));
  for (const auto& op : prep.ops) rho.apply_unitary(op);
  const auto prepared = qsim::run(prep);
  psi.assign(prepared.amplitudes().begin(), prepared.amplitudes().end());
  rho.depolarize_1q(1, p);
  const Complex i(0, 1);
  const double a = std::sqrt(1 - 3 * p / 4), b = std::sqrt(p / 4);
  const std::vector<Matrix> ks = {{{a, 0}, {0, a}}, {{0, b}, {b, 0}}, {{0, -i * b}, {i * b, 0}}, {{b, 0}, {0, -b}}};
  const auto ref = kraus(outer(psi), ks, 1, n);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(rho.at(r, k) - ref[r][k]) < 1e-13);
}

TEST_CASE("two-qubit depolarizing at p = 1 gives the maximally mixed pair") {
  DensityMatrix rho(2);
  rho.apply_unitary(qsim::GateOp::hadamard(0));
  rho.depolarize_2q(0, 1, 1.0);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(rho.at(r, k) - Complex(r == k ? 0.25 : 0.0)) < 1e-15);
}

TEST_CASE("thermal relaxation decays population with T1 and coherence with T2") {
  const double t1 = 100e-6, t2 = 60e-6, t = 20e-6;
  DensityMatrix excited(1);
  excited.apply_unitary(qsim::GateOp::rx(0, std::numbers::pi));
  excited.thermal_relaxation(0, t, t1, t2);
  CHECK(excited.at(1, 1).real() == doctest::Approx(std::exp(-t / t1)));
  DensityMatrix plus(1);
  plus.apply_unitary(qsim::GateOp::hadamard(0));
  plus.thermal_relaxation(0, t, t1, t2);
  CHECK(std::abs(plus.at(0, 1)) == doctest::Approx(0.5 * std::exp(-t / t2)));
  CHECK(plus.trace() == doctest::Approx(1.0));
}

TEST_CASE("readout confusion by hand") {
  NoiseModel m;
  m.readout_p01 = 0.1;
  m.readout_p10 = 0.2;
  const auto p = apply_readout({1.0, 0.0}, 1, m);
  CHECK(p[0] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(0.1));
  const auto q = apply_readout({0.0, 1.0}, 1, m);
  CHECK(q[0] == doctest::Approx(0.2));
  m.readout_per_qubit = {{0.5, 0.5, 0.5, 0.5}};
  CHECK(apply_readout({1.0, 0.0}, 1, m)[1] == doctest::Approx(0.5));
}

TEST_CASE("native count scales two-qubit noise") {
  CHECK(native_two_qubit_count(qsim::GateKind::ControlledPhase) == 2);
  CHECK(native_two_qubit_count(qsim::GateKind::IsingXY) == 2);
  CHECK(native_two_qubit_count(qsim::GateKind::Swap) == 3);
  qsim::CircuitSpec c;
  c.n_qubits = 2;
  c.append(qsim::GateOp::swap(0, 1));
  NoiseModel m;
  m.p_depol_2q = 0.1;
  const auto rho = evolve(c, m);
  // Three applications of rho -> (1 - p) rho + p I / 4 on |00><00|.
  CHECK(rho.at(0, 0).real() == doctest::Approx(0.25 + 0.75 * std::pow(1.0 - 0.1, 3)));
}

TEST_CASE("sampled expectations converge to the exact noisy ones") {
  const auto c = sample_circuit();
  const auto m = NoiseModel::heron_like();
  const auto exact = exact_noisy_expectations(c, m);
  const auto est = noisy_expectations(c, m, 200000, 7);
  for (std::size_t q = 0; q < exact.size(); ++q) CHECK(std::abs(est[q] - exact[q]) < 0.01);
}

TEST_CASE("shot sweep without noise has zero bias") {
  std::mt19937_64 rng(3);
  const auto p = mixer::MixerParams::random(3, 3, 1, rng);
  auto s = mixer::RobustScalerState::create(6);
  std::normal_distribution<double> nd;
  std::vector<double> batch(60);
  for (auto& v : batch) v = nd(rng);
  mixer::scaler_update(s, batch, 10);
  std::vector<double> row{0.1, -0.2, 0.3, 0.0, 0.5, -0.1};
  const auto r = shot_sweep(p, s, row, NoiseModel::ideal(), {100, 1000}, 4, 1);
  CHECK(r.bias_mse < 1e-25);
  CHECK(r.mse.size() == 2);
  CHECK(r.mse[0].size() == 4);
}

TEST_CASE("profile JSON round trip and strictness") {
  const auto m = NoiseModel::heron_like();
  const auto back = noise_model_from_json(to_json(m));
  CHECK(back.t1 == m.t1);
  CHECK(back.readout_p01 == m.readout_p01);
  auto j = to_json(NoiseModel::ideal());
  CHECK(std::isinf(noise_model_from_json(j).t1));
  j["p_depol_3q"] = 0.1;
  CHECK_THROWS_AS(noise_model_from_json(j), ConfigError);
  auto k = to_json(m);
  k["t2"] = 1.0;
  CHECK_THROWS_AS(noise_model_from_json(k), ConfigError);
}

TEST_CASE("circuit budget") {
  model::ModelConfig c;
  c.c_q = 5;
  c.mixer = model::MixerKind::Vqc;
  c.padding = 0;
  const auto b = circuit_budget(c, 50, 40, 28, 1000);
  CHECK(b.per_forward == 90000);
  CHECK(b.total_shots == 90'000'000);
}
