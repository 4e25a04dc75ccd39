#include "hqfno/noise.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>

namespace hqfno::noise {
namespace {

using json = nlohmann::json;

qsim::GateOp conjugate_on_columns(const qsim::GateOp& g, int n) {
  qsim::GateOp c = g;
  c.targets = {g.targets[0] + n, g.targets[1] + n};
  if (g.has_angle()) c.angle = -g.angle;  // conj of every gate here is the same kind at -angle
  return c;
}

json time_to_json(double t) { return std::isinf(t) ? json(nullptr) : json(t); }

double time_from_json(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

NoiseModel NoiseModel::ideal() { return {}; }

NoiseModel NoiseModel::heron_like() {
  NoiseModel m;
  m.name = "heron-like";
  m.p_depol_1q = 3e-4;
  m.p_depol_2q = 3e-3;
  m.t1 = 150e-6;
  m.t2 = 100e-6;
  m.gate_time_1q = 50e-9;
  m.gate_time_2q = 100e-9;
  m.readout_p01 = 1e-2;
  m.readout_p10 = 1e-2;
  return m;
}

void NoiseModel::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
  };
  prob(p_depol_1q, "p_depol_1q");
  prob(p_depol_2q, "p_depol_2q");
  prob(readout_p01, "readout_p01");
  prob(readout_p10, "readout_p10");
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw ConfigError("T1 and T2 must be positive");
  if (!std::isinf(t2) && t2 > 2.0 * t1 * (1.0 + 1e-12)) throw ConfigError("T2 must not exceed 2 T1");
  if (gate_time_1q < 0.0 || gate_time_2q < 0.0) throw ConfigError("gate times must be >= 0");
  for (const auto& m : readout_per_qubit) {
    for (double v : m) prob(v, "readout entry");
    if (std::abs(m[0] + m[1] - 1.0) > 1e-12 || std::abs(m[2] + m[3] - 1.0) > 1e-12) {
      throw ConfigError("readout rows must sum to 1");
    }
  }
}

bool NoiseModel::has_gate_noise() const {
  return p_depol_1q > 0.0 || p_depol_2q > 0.0 ||
         ((!std::isinf(t1) || !std::isinf(t2)) && (gate_time_1q > 0.0 || gate_time_2q > 0.0));
}

std::array<double, 4> NoiseModel::readout_matrix(int qubit) const {
  if (qubit >= 0 && static_cast<std::size_t>(qubit) < readout_per_qubit.size()) {
    return readout_per_qubit[static_cast<std::size_t>(qubit)];
  }
  return {1.0 - readout_p01, readout_p01, readout_p10, 1.0 - readout_p10};
}

json to_json(const NoiseModel& m) {
  json j = {{"schema_version", 1},
            {"name", m.name},
            {"p_depol_1q", m.p_depol_1q},
            {"p_depol_2q", m.p_depol_2q},
            {"t1", time_to_json(m.t1)},
            {"t2", time_to_json(m.t2)},
            {"gate_time_1q", m.gate_time_1q},
            {"gate_time_2q", m.gate_time_2q},
            {"readout_p01", m.readout_p01},
            {"readout_p10", m.readout_p10},
            {"readout_per_qubit", m.readout_per_qubit}};
  return j;
}

NoiseModel noise_model_from_json(const json& j) {
  static const std::set<std::string> keys = {
      "schema_version", "name",         "p_depol_1q",   "p_depol_2q",  "t1", "t2",
      "gate_time_1q",   "gate_time_2q", "readout_p01",  "readout_p10", "readout_per_qubit",
      "description"};
  if (!j.is_object()) throw ConfigError("noise profile must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ConfigError("unknown noise profile key '" + k + "'");
  }
  if (j.value("schema_version", 1) != 1) throw ConfigError("unsupported noise profile schema");
  NoiseModel m;
  try {
    m.name = j.value("name", m.name);
    m.p_depol_1q = j.value("p_depol_1q", 0.0);
    m.p_depol_2q = j.value("p_depol_2q", 0.0);
    if (j.contains("t1")) m.t1 = time_from_json(j["t1"]);
    if (j.contains("t2")) m.t2 = time_from_json(j["t2"]);
    m.gate_time_1q = j.value("gate_time_1q", 0.0);
    m.gate_time_2q = j.value("gate_time_2q", 0.0);
    m.readout_p01 = j.value("readout_p01", 0.0);
    m.readout_p10 = j.value("readout_p10", 0.0);
    if (j.contains("readout_per_qubit")) {
      m.readout_per_qubit = j["readout_per_qubit"].get<std::vector<std::array<double, 4>>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed noise profile: ") + e.what());
  }
  m.validate();
  return m;
}

NoiseModel load_noise_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open noise profile " + path.string());
  try {
    return noise_model_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("noise profile " + path.string() + " is not valid JSON: " + e.what());
  }
}

int native_two_qubit_count(qsim::GateKind kind) {
  switch (kind) {
    case qsim::GateKind::ControlledPhase: return 2;
    case qsim::GateKind::IsingXY: return 2;
    case qsim::GateKind::Swap: return 3;
    default: return 0;
  }
}

DensityMatrix::DensityMatrix(int n_qubits) : n_(n_qubits) {
  if (n_qubits < 1 || n_qubits > 10) throw DomainError("density matrices support 1..10 qubits");
  data_.assign(std::size_t{1} << (2 * n_qubits), Complex{0.0, 0.0});
  data_[0] = 1.0;
}

double DensityMatrix::trace() const {
  double t = 0.0;
  const std::size_t dim = std::size_t{1} << n_;
  for (std::size_t r = 0; r < dim; ++r) t += at(r, r).real();
  return t;
}

std::vector<double> DensityMatrix::probabilities() const {
  const std::size_t dim = std::size_t{1} << n_;
  std::vector<double> p(dim);
  for (std::size_t r = 0; r < dim; ++r) p[r] = std::max(0.0, at(r, r).real());
  return p;
}

void DensityMatrix::apply_unitary(const qsim::GateOp& gate) {
  qsim::apply_gate(data_, 2 * n_, gate);
  qsim::apply_gate(data_, 2 * n_, conjugate_on_columns(gate, n_));
}

void DensityMatrix::depolarize_1q(int q, double p) {
  if (p == 0.0) return;
  const std::size_t rb = std::size_t{1} << q;
  const std::size_t cb = std::size_t{1} << (q + n_);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (i & (rb | cb)) continue;
    Complex& a = data_[i];
    Complex& b = data_[i | cb];
    Complex& c = data_[i | rb];
    Complex& d = data_[i | rb | cb];
    const Complex mix = 0.5 * p * (a + d);
    a = (1.0 - p) * a + mix;
    d = (1.0 - p) * d + mix;
    b *= 1.0 - p;
    c *= 1.0 - p;
  }
}

void DensityMatrix::depolarize_2q(int q0, int q1, double p) {
  if (p == 0.0) return;
  const std::size_t r0 = std::size_t{1} << q0, r1 = std::size_t{1} << q1;
  const std::size_t c0 = r0 << n_, c1 = r1 << n_;
  const std::size_t rows[4] = {0, r0, r1, r0 | r1};
  const std::size_t cols[4] = {0, c0, c1, c0 | c1};
  const std::size_t mask = r0 | r1 | c0 | c1;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (i & mask) continue;
    Complex tr = 0.0;
    for (int k = 0; k < 4; ++k) tr += data_[i | rows[k] | cols[k]];
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        Complex& v = data_[i | rows[r] | cols[c]];
        v *= 1.0 - p;
        if (r == c) v += 0.25 * p * tr;
      }
    }
  }
}

void DensityMatrix::thermal_relaxation(int q, double duration, double t1, double t2) {
  if (duration <= 0.0) return;
  const double gamma = std::isinf(t1) ? 0.0 : 1.0 - std::exp(-duration / t1);
  const double coherence = std::isinf(t2) ? 1.0 : std::exp(-duration / t2);
  // Remaining coherence decay beyond what amplitude damping already gives.
  const double damp_coh = std::sqrt(1.0 - gamma);
  const double extra = damp_coh > 0.0 ? std::min(1.0, coherence / damp_coh) : 0.0;
  const std::size_t rb = std::size_t{1} << q;
  const std::size_t cb = std::size_t{1} << (q + n_);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (i & (rb | cb)) continue;
    Complex& a = data_[i];
    Complex& d = data_[i | rb | cb];
    a += gamma * d;
    d *= 1.0 - gamma;
    data_[i | cb] *= damp_coh * extra;
    data_[i | rb] *= damp_coh * extra;
  }
}

DensityMatrix evolve(const qsim::CircuitSpec& circuit, const NoiseModel& noise) {
  circuit.validate();
  noise.validate();
  DensityMatrix rho(circuit.n_qubits);
  for (const auto& op : circuit.ops) {
    rho.apply_unitary(op);
    if (op.arity() == 1) {
      const int q = op.targets[0];
      rho.depolarize_1q(q, noise.p_depol_1q);
      rho.thermal_relaxation(q, noise.gate_time_1q, noise.t1, noise.t2);
    } else {
      const int natives = native_two_qubit_count(op.kind);
      for (int k = 0; k < natives; ++k) {
        rho.depolarize_2q(op.targets[0], op.targets[1], noise.p_depol_2q);
        rho.thermal_relaxation(op.targets[0], noise.gate_time_2q, noise.t1, noise.t2);
        rho.thermal_relaxation(op.targets[1], noise.gate_time_2q, noise.t1, noise.t2);
      }
    }
  }
  return rho;
}

std::vector<double> apply_readout(std::vector<double> probs, int n_qubits, const NoiseModel& noise) {
  if (probs.size() != (std::size_t{1} << n_qubits)) throw ShapeError("probability vector size");
  for (int q = 0; q < n_qubits; ++q) {
    const auto m = noise.readout_matrix(q);
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (i & bit) continue;
      const double p0 = probs[i], p1 = probs[i | bit];
      probs[i] = m[0] * p0 + m[2] * p1;
      probs[i | bit] = m[1] * p0 + m[3] * p1;
    }
  }
  return probs;
}

namespace {

std::vector<double> z_from_probs(std::span<const double> p, int n) {
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  for (std::size_t b = 0; b < p.size(); ++b) {
    for (int q = 0; q < n; ++q) z[q] += ((b >> q) & 1U) ? -p[b] : p[b];
  }
  return z;
}

std::vector<double> noisy_probabilities(const qsim::CircuitSpec& circuit, const NoiseModel& noise) {
  return apply_readout(evolve(circuit, noise).probabilities(), circuit.n_qubits, noise);
}

std::vector<double> mixer_output(const mixer::MixerParams& params, std::span<const double> z) {
  std::vector<double> y(static_cast<std::size_t>(2 * params.channels));
  params.decode.forward(z, y);
  return y;
}

double mse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

std::vector<double> exact_noisy_expectations(const qsim::CircuitSpec& circuit,
                                             const NoiseModel& noise) {
  return z_from_probs(noisy_probabilities(circuit, noise), circuit.n_qubits);
}

std::vector<double> sample_expectations(std::span<const double> probs, int n_qubits, int shots,
                                        std::mt19937_64& rng) {
  if (shots < 1) throw DomainError("shots must be >= 1");
  std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
  std::vector<double> counts(probs.size(), 0.0);
  for (int s = 0; s < shots; ++s) counts[dist(rng)] += 1.0;
  for (auto& c : counts) c /= shots;
  return z_from_probs(counts, n_qubits);
}

std::vector<double> noisy_expectations(const qsim::CircuitSpec& circuit, const NoiseModel& noise,
                                       int shots, std::uint64_t seed) {
  if (shots < 1) throw DomainError("shots must be >= 1");
  const auto p = noisy_probabilities(circuit, noise);
  std::mt19937_64 rng(seed);
  return sample_expectations(p, circuit.n_qubits, shots, rng);
}

ShotStudyResult shot_sweep(const mixer::MixerParams& params, const mixer::RobustScalerState& scaler,
                           std::span<const double> row, const NoiseModel& noise,
                           const std::vector<int>& shots_grid, int n_repeats, std::uint64_t seed) {
  if (n_repeats < 1 || shots_grid.empty()) throw DomainError("need repeats and a shot grid");
  const auto angles = mixer::scale_to_angles(scaler, row);
  std::vector<double> embedding(static_cast<std::size_t>(params.n_qubits));
  params.encode.forward(angles, embedding);
  const auto circuit = mixer::build_mixer_circuit(params, embedding);

  ShotStudyResult r;
  r.shots_grid = shots_grid;
  r.noiseless_reference = mixer::vqc_forward_row(params, scaler, row);
  const auto probs = noisy_probabilities(circuit, noise);
  r.noisy_exact = mixer_output(params, z_from_probs(probs, params.n_qubits));
  r.bias_mse = mse(r.noisy_exact, r.noiseless_reference);
  for (std::size_t s = 0; s < shots_grid.size(); ++s) {
    std::vector<double> vals;
    for (int rep = 0; rep < n_repeats; ++rep) {
      std::mt19937_64 rng(seed + 7919ULL * s + 104729ULL * static_cast<std::uint64_t>(rep));
      const auto z = sample_expectations(probs, params.n_qubits, shots_grid[s], rng);
      vals.push_back(mse(mixer_output(params, z), r.noiseless_reference));
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= n_repeats;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    r.mse_mean.push_back(mean);
    r.mse_std.push_back(std::sqrt(var / n_repeats));
    r.mse.push_back(std::move(vals));
  }
  return r;
}

double loglog_slope(const ShotStudyResult& r) {
  const std::size_t n = r.shots_grid.size();
  if (n < 2) throw DomainError("slope needs at least two shot counts");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(static_cast<double>(r.shots_grid[i]));
    const double y = std::log(r.mse_mean[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_shot_csv(std::ostream& out, const ShotStudyResult& r) {
  out << "shots,repeat,mse\n" << std::setprecision(12);
  for (std::size_t s = 0; s < r.shots_grid.size(); ++s) {
    for (std::size_t k = 0; k < r.mse[s].size(); ++k) {
      out << r.shots_grid[s] << "," << k << "," << r.mse[s][k] << "\n";
    }
  }
}

CircuitBudget circuit_budget(const model::ModelConfig& config, std::size_t nx, std::size_t ny,
                             std::size_t nz, std::int64_t shots) {
  config.validate();
  CircuitBudget b;
  b.modes = model::layer_modes(config, nx, ny, nz);
  b.per_forward = static_cast<std::int64_t>(config.layers) * 4 * b.modes.total();
  b.total_shots = b.per_forward * shots;
  return b;
}

}  // namespace hqfno::noise
