#include "hqfno/diag.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hqfno/mixer.hpp"

namespace hqfno::diag {
namespace {

constexpr double kProbFloor = 1e-12;

int dft_half(int grid_size) { return (grid_size - 1) / 2; }

void append_block(qsim::CircuitSpec& c, std::span<const double> theta, std::size_t& t,
                  int n_qubits) {
  for (int q = 0; q < n_qubits; ++q) {
    c.append(qsim::GateOp::rz(q, theta[t++]), true);
    c.append(qsim::GateOp::rx(q, theta[t++]), true);
    c.append(qsim::GateOp::rz(q, theta[t++]), true);
  }
  for (int q = 0; q + 1 < n_qubits; ++q) c.append(qsim::GateOp::ising_xy(q, q + 1, theta[t++]), true);
}

// <Z_0> of blocks interleaved with uploads of x[j] on qubit j.
double reupload_value(int n_qubits, int encodings, std::span<const double> theta,
                      std::span<const double> x) {
  qsim::CircuitSpec c;
  c.n_qubits = n_qubits;
  std::size_t t = 0;
  for (int k = 0; k <= encodings; ++k) {
    append_block(c, theta, t, n_qubits);
    if (k < encodings) {
      for (std::size_t j = 0; j < x.size(); ++j) c.append(qsim::GateOp::rx(static_cast<int>(j), x[j]));
    }
  }
  return qsim::expect_z_all(qsim::run(c))[0];
}

std::vector<double> random_angles(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  std::vector<double> v(n);
  for (auto& a : v) a = u(rng);
  return v;
}

}  // namespace

CircuitFamily single_rx_family() {
  CircuitFamily f;
  f.name = "single-rx";
  f.n_qubits = 1;
  f.n_params = 1;
  f.n_inputs = 0;
  f.build = [](std::span<const double> theta, std::span<const double>) {
    qsim::CircuitSpec c;
    c.n_qubits = 1;
    c.append(qsim::GateOp::rx(0, theta[0]), true);
    return c;
  };
  return f;
}

CircuitFamily mixer_family(int n_qubits, int depth) {
  CircuitFamily f;
  f.name = "mixer";
  f.n_qubits = n_qubits;
  f.n_params = static_cast<int>(mixer::circuit_param_count(n_qubits, depth));
  f.n_inputs = n_qubits;
  auto base = mixer::MixerParams::zeros(1, n_qubits, depth);
  f.build = [base](std::span<const double> theta, std::span<const double> x) mutable {
    base.theta.assign(theta.begin(), theta.end());
    return mixer::build_mixer_circuit(base, x);
  };
  return f;
}

std::vector<double> fisher_at(const CircuitFamily& family, std::span<const double> theta,
                              std::span<const double> x, std::size_t* excluded) {
  const auto circuit = family.build(theta, x);
  if (circuit.trainable_count() != static_cast<std::size_t>(family.n_params)) {
    throw ShapeError("circuit family flags the wrong number of trainable ops");
  }
  const qsim::Statevector input(family.n_qubits);
  const auto psi = qsim::run(circuit, input);
  const auto dpsi = qsim::trainable_state_derivatives(circuit, input);
  const auto n = static_cast<std::size_t>(family.n_params);
  std::vector<double> fim(n * n, 0.0);
  std::vector<double> dp(n);
  for (std::size_t y = 0; y < psi.dimension(); ++y) {
    const double p = std::norm(psi[y]);
    if (p < kProbFloor) {
      if (excluded) ++*excluded;
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) dp[k] = 2.0 * std::real(std::conj(psi[y]) * dpsi[k][y]);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) fim[a * n + b] += dp[a] * dp[b] / p;
    }
  }
  return fim;
}

FimReport estimate_fim(const CircuitFamily& family, int n_theta_samples, int n_data_samples,
                       std::uint64_t seed, int depth) {
  if (n_theta_samples < 1 || n_data_samples < 1) throw DomainError("need >= 1 theta and x draw");
  if (family.n_qubits > 8) throw DomainError("exact FIM is limited to n_q <= 8");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = static_cast<std::size_t>(family.n_params);
  FimReport r;
  r.n_params = family.n_params;
  r.depth = depth;
  r.matrix.assign(n * n, 0.0);
  std::vector<double> per_draw_mean;
  for (int t = 0; t < n_theta_samples; ++t) {
    const auto theta = random_angles(n, rng);
    std::vector<double> f_theta(n * n, 0.0);
    const int n_data = family.n_inputs == 0 ? 1 : n_data_samples;
    for (int d = 0; d < n_data; ++d) {
      std::vector<double> x(static_cast<std::size_t>(family.n_inputs));
      for (auto& v : x) v = gauss(rng);
      const auto f = fisher_at(family, theta, x, &r.excluded_outcomes);
      for (std::size_t i = 0; i < f.size(); ++i) f_theta[i] += f[i] / n_data;
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += f_theta[i * n + i];
    per_draw_mean.push_back(n ? trace / static_cast<double>(n) : 0.0);
    for (std::size_t i = 0; i < f_theta.size(); ++i) r.matrix[i] += f_theta[i] / n_theta_samples;
  }

  Eigen::MatrixXd m(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r.matrix[a * n + b];
      r.max_asymmetry = std::max(r.max_asymmetry, std::abs(r.matrix[a * n + b] - r.matrix[b * n + a]));
    }
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  const auto& ev = solver.eigenvalues();
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(r.eigenvalues.rbegin(), r.eigenvalues.rend());
  const double top = r.eigenvalues.empty() ? 0.0 : r.eigenvalues.front();
  for (double e : r.eigenvalues) {
    if (top > 0.0 && e > r.rank_tolerance * top) ++r.numerical_rank;
  }
  double mean = 0.0;
  for (double v : per_draw_mean) mean += v;
  mean /= static_cast<double>(per_draw_mean.size());
  double var = 0.0;
  for (double v : per_draw_mean) var += (v - mean) * (v - mean);
  r.mean_eigenvalue = mean;
  if (per_draw_mean.size() > 1) {
    var /= static_cast<double>(per_draw_mean.size() - 1);
    r.mean_eigenvalue_stderr = std::sqrt(var / static_cast<double>(per_draw_mean.size()));
  }
  return r;
}

ReuploadModel ReuploadModel::random(int n_qubits, int encodings, std::uint64_t seed) {
  if (n_qubits < 1 || encodings < 0) throw DomainError("need n_q >= 1 and d_enc >= 0");
  std::mt19937_64 rng(seed);
  ReuploadModel m;
  m.n_qubits = n_qubits;
  m.encodings = encodings;
  m.theta = random_angles(
      static_cast<std::size_t>(params_per_block(n_qubits) * (encodings + 1)), rng);
  return m;
}

qsim::CircuitSpec ReuploadModel::circuit(double x) const {
  qsim::CircuitSpec c;
  c.n_qubits = n_qubits;
  std::size_t t = 0;
  for (int k = 0; k <= encodings; ++k) {
    append_block(c, theta, t, n_qubits);
    if (k < encodings) c.append(qsim::GateOp::rx(0, x));
  }
  return c;
}

double ReuploadModel::evaluate(double x) const {
  return qsim::expect_z_all(qsim::run(circuit(x)))[0];
}

FourierSpectrumReport fourier_spectrum(const ReuploadModel& model, int grid_size,
                                       double tolerance) {
  if (grid_size < 2 * model.encodings + 1) {
    throw DomainError("aliasing: grid of " + std::to_string(grid_size) +
                      " points cannot resolve " + std::to_string(2 * model.encodings + 1) +
                      " frequencies");
  }
  FourierSpectrumReport r;
  r.encodings = model.encodings;
  r.grid_size = grid_size;
  r.tolerance = tolerance;
  r.admissible_count = 2 * model.encodings + 1;
  std::vector<double> f(static_cast<std::size_t>(grid_size));
  for (int j = 0; j < grid_size; ++j) f[j] = model.evaluate(2.0 * std::numbers::pi * j / grid_size);
  const int half = dft_half(grid_size);
  for (int w = -half; w <= half; ++w) {
    std::complex<double> c = 0.0;
    for (int j = 0; j < grid_size; ++j) {
      c += f[j] * std::polar(1.0, -2.0 * std::numbers::pi * w * j / grid_size);
    }
    c /= static_cast<double>(grid_size);
    r.frequencies.push_back(w);
    r.coefficients.push_back(c);
    if (std::abs(c) > tolerance) ++r.nonzero_count;
    if (std::abs(w) > model.encodings) r.max_outside_band = std::max(r.max_outside_band, std::abs(c));
  }
  return r;
}

FourierSpectrumReport fourier_spectrum_random(int n_qubits, int encodings, int n_theta_draws,
                                              int grid_size, std::uint64_t seed) {
  if (n_theta_draws < 1) throw DomainError("need at least one theta draw");
  FourierSpectrumReport agg;
  std::vector<bool> support;
  for (int d = 0; d < n_theta_draws; ++d) {
    const auto model = ReuploadModel::random(n_qubits, encodings, seed + static_cast<std::uint64_t>(d));
    const auto r = fourier_spectrum(model, grid_size);
    if (d == 0) {
      agg = r;
      support.assign(r.coefficients.size(), false);
    }
    agg.max_outside_band = std::max(agg.max_outside_band, r.max_outside_band);
    for (std::size_t i = 0; i < r.coefficients.size(); ++i) {
      support[i] = support[i] || std::abs(r.coefficients[i]) > r.tolerance;
    }
  }
  agg.nonzero_count = static_cast<int>(std::count(support.begin(), support.end(), true));
  return agg;
}

LatticeReport fourier_lattice(int features, int encodings, int grid_size, std::uint64_t seed,
                              double tolerance) {
  if (features < 1 || features > 4) throw DomainError("lattice probe supports 1..4 features");
  if (grid_size < 2 * encodings + 1) throw DomainError("aliasing: lattice grid too small");
  std::mt19937_64 rng(seed);
  const auto theta = random_angles(
      static_cast<std::size_t>(ReuploadModel::params_per_block(features) * (encodings + 1)), rng);
  std::size_t total = 1;
  for (int j = 0; j < features; ++j) total *= static_cast<std::size_t>(grid_size);
  std::vector<double> f(total);
  std::vector<double> x(static_cast<std::size_t>(features));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int j = features - 1; j >= 0; --j) {
      x[j] = 2.0 * std::numbers::pi * static_cast<double>(rem % grid_size) / grid_size;
      rem /= static_cast<std::size_t>(grid_size);
    }
    f[idx] = reupload_value(features, encodings, theta, x);
  }
  // Separable DFT, one axis at a time, on a complex copy.
  std::vector<std::complex<double>> c(f.begin(), f.end());
  std::size_t stride = 1;
  for (int axis = features - 1; axis >= 0; --axis) {
    std::vector<std::complex<double>> next(total);
    const auto n = static_cast<std::size_t>(grid_size);
    for (std::size_t idx = 0; idx < total; ++idx) {
      const std::size_t k = (idx / stride) % n;
      const std::size_t base = idx - k * stride;
      std::complex<double> s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        s += c[base + j * stride] *
             std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * j) / grid_size);
      }
      next[idx] = s / static_cast<double>(grid_size);
    }
    c = std::move(next);
    stride *= n;
  }
  LatticeReport r;
  r.features = features;
  r.encodings = encodings;
  r.grid_size = grid_size;
  r.admissible_count = 1;
  for (int j = 0; j < features; ++j) r.admissible_count *= static_cast<std::size_t>(2 * encodings + 1);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    bool inside = true;
    for (int j = 0; j < features; ++j) {
      int k = static_cast<int>(rem % grid_size);
      rem /= static_cast<std::size_t>(grid_size);
      if (k > grid_size / 2) k -= grid_size;
      if (std::abs(k) > encodings) inside = false;
    }
    const double mag = std::abs(c[idx]);
    if (inside) {
      if (mag > tolerance) ++r.nonzero_count;
    } else {
      r.max_outside_band = std::max(r.max_outside_band, mag);
    }
  }
  return r;
}

}  // namespace hqfno::diag
