#pragma once

// Noisy execution of mixer circuits: density-matrix evolution with gate
// depolarizing and thermal-relaxation channels, readout confusion, and
// finite-shot sampling of Z expectations.

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hqfno/mixer.hpp"
#include "hqfno/model.hpp"
#include "hqfno/qsim.hpp"
#include "json.hpp"

namespace hqfno::noise {

struct NoiseModel {
  std::string name = "ideal";
  double p_depol_1q = 0.0;
  double p_depol_2q = 0.0;
  double t1 = std::numeric_limits<double>::infinity();  // s
  double t2 = std::numeric_limits<double>::infinity();  // s
  double gate_time_1q = 0.0;                            // s
  double gate_time_2q = 0.0;                            // s
  // Readout confusion rows {P(0|0), P(1|0)} and {P(0|1), P(1|1)}.
  double readout_p01 = 0.0;  // report 1 when prepared 0
  double readout_p10 = 0.0;  // report 0 when prepared 1
  // Optional per-qubit override, {P(0|0), P(1|0), P(0|1), P(1|1)}.
  std::vector<std::array<double, 4>> readout_per_qubit;

  static NoiseModel ideal();
  /// Illustrative superconducting-device magnitudes, not a calibration.
  static NoiseModel heron_like();

  /// Throws ConfigError on out-of-range probabilities, T2 > 2 T1, or
  /// readout rows that do not sum to 1.
  void validate() const;
  bool has_gate_noise() const;
  std::array<double, 4> readout_matrix(int qubit) const;
};

nlohmann::json to_json(const NoiseModel& m);
/// Unknown keys are rejected.
NoiseModel noise_model_from_json(const nlohmann::json& j);
NoiseModel load_noise_profile(const std::filesystem::path& path);

/// Native two-qubit gate count used to scale 2q noise: CP -> 2, IsingXY -> 2, SWAP -> 3.
int native_two_qubit_count(qsim::GateKind kind);

/// rho as the 2n-qubit vector |rho>> with rho[r, c] at index r + (c << n).
class DensityMatrix {
 public:
  explicit DensityMatrix(int n_qubits);  // |0..0><0..0|

  int n_qubits() const { return n_; }
  Complex at(std::size_t row, std::size_t col) const { return data_[row + (col << n_)]; }
  double trace() const;
  std::vector<double> probabilities() const;

  void apply_unitary(const qsim::GateOp& gate);
  void depolarize_1q(int q, double p);
  void depolarize_2q(int q0, int q1, double p);
  /// Amplitude damping with gamma = 1 - exp(-t/T1), then pure dephasing so
  /// coherences decay as exp(-t/T2) overall.
  void thermal_relaxation(int q, double duration, double t1, double t2);

 private:
  int n_;
  std::vector<Complex> data_;
};

/// Runs the circuit with noise after every gate on the gate's qubits.
DensityMatrix evolve(const qsim::CircuitSpec& circuit, const NoiseModel& noise);

/// Per-qubit confusion applied to an outcome distribution.
std::vector<double> apply_readout(std::vector<double> probs, int n_qubits, const NoiseModel& noise);

/// Exact <Z_j> of the readout-distorted outcome distribution.
std::vector<double> exact_noisy_expectations(const qsim::CircuitSpec& circuit,
                                             const NoiseModel& noise);
/// <Z_j> estimated from `shots` samples of the noisy distribution.
std::vector<double> sample_expectations(std::span<const double> probs, int n_qubits, int shots,
                                        std::mt19937_64& rng);
std::vector<double> noisy_expectations(const qsim::CircuitSpec& circuit, const NoiseModel& noise,
                                       int shots, std::uint64_t seed);

struct ShotStudyResult {
  std::vector<int> shots_grid;
  std::vector<double> mse_mean;
  std::vector<double> mse_std;
  std::vector<std::vector<double>> mse;  // [shot index][repeat]
  std::vector<double> noiseless_reference;
  std::vector<double> noisy_exact;       // infinite-shot noisy output
  double bias_mse = 0.0;                 // MSE(noisy_exact, noiseless)
};

/// Mixer output y = D <Z> + b for one mode row, noiseless vs noisy with
/// finite shots, n_repeats times per shot count.
ShotStudyResult shot_sweep(const mixer::MixerParams& params, const mixer::RobustScalerState& scaler,
                           std::span<const double> row, const NoiseModel& noise,
                           const std::vector<int>& shots_grid, int n_repeats, std::uint64_t seed);

/// Least-squares slope of log(mse_mean) against log(shots).
double loglog_slope(const ShotStudyResult& r);

void write_shot_csv(std::ostream& out, const ShotStudyResult& r);

struct CircuitBudget {
  spectral::ModeCounts modes;
  std::int64_t per_forward = 0;  // L * 4 * m_x m_y m_z
  std::int64_t total_shots = 0;  // per_forward * shots
};

/// Mixer invocations per sample for an unpadded nx x ny x nz input.
CircuitBudget circuit_budget(const model::ModelConfig& config, std::size_t nx, std::size_t ny,
                             std::size_t nz, std::int64_t shots = 0);

}  // namespace hqfno::noise
