#pragma once

// Circuit diagnostics: classical Fisher information of the measured output
// distribution and the Fourier spectrum of data re-uploading models.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hqfno/qsim.hpp"

namespace hqfno::diag {

/// Parameterized circuit family: build(theta, x) must flag exactly n_params
/// trainable ops, in theta order.
struct CircuitFamily {
  std::string name;
  int n_qubits = 0;
  int n_params = 0;
  int n_inputs = 0;
  std::function<qsim::CircuitSpec(std::span<const double>, std::span<const double>)> build;
};

/// RX(theta) on one qubit, no data input.
CircuitFamily single_rx_family();
/// The mixer circuit (RX embedding, QFT, depth-d mesh, QFT^-1) over its
/// 3 d (n_q - 1) mesh angles; the embedding angles are the data.
CircuitFamily mixer_family(int n_qubits, int depth);

struct FimReport {
  int n_params = 0;
  int depth = 0;
  std::vector<double> matrix;       // n_params x n_params, row-major
  std::vector<double> eigenvalues;  // descending
  int numerical_rank = 0;
  double rank_tolerance = 1e-10;    // relative to the largest eigenvalue
  double max_asymmetry = 0.0;
  std::size_t excluded_outcomes = 0;
  double mean_eigenvalue = 0.0;         // trace / n_params
  double mean_eigenvalue_stderr = 0.0;  // across theta draws
  std::string zx_redundancy = "not computed";

  double at(int r, int c) const { return matrix[static_cast<std::size_t>(r) * n_params + c]; }
};

/// Exact per-(theta, x) Fisher matrix sum_y dp dp^T / p, outcomes with
/// p < 1e-12 skipped and counted in `excluded`.
std::vector<double> fisher_at(const CircuitFamily& family, std::span<const double> theta,
                              std::span<const double> x, std::size_t* excluded = nullptr);

/// theta ~ U[0, 2 pi), x ~ N(0, 1); averages over n_data inputs per theta
/// draw, then over draws, and eigendecomposes the result.
FimReport estimate_fim(const CircuitFamily& family, int n_theta_samples, int n_data_samples,
                       std::uint64_t seed, int depth = 0);

struct FourierSpectrumReport {
  int encodings = 0;
  int grid_size = 0;
  std::vector<int> frequencies;               // -d_max .. d_max
  std::vector<std::complex<double>> coefficients;
  int nonzero_count = 0;
  int admissible_count = 0;                   // 2 d_enc + 1
  double max_outside_band = 0.0;
  double tolerance = 1e-9;
};

/// f(x) = <Z_0> after trainable blocks interleaved with d_enc RX(x) uploads on
/// qubit 0. Each block applies RZ RX RZ to every qubit, then IsingXY on
/// neighbouring pairs.
struct ReuploadModel {
  int n_qubits = 1;
  int encodings = 1;
  std::vector<double> theta;

  static ReuploadModel random(int n_qubits, int encodings, std::uint64_t seed);
  static int params_per_block(int n_qubits) { return 3 * n_qubits + (n_qubits - 1); }
  qsim::CircuitSpec circuit(double x) const;
  double evaluate(double x) const;
};

/// Samples f on grid_size points of [0, 2 pi) and takes the DFT. Throws
/// DomainError (aliasing) when grid_size < 2 d_enc + 1.
FourierSpectrumReport fourier_spectrum(const ReuploadModel& model, int grid_size,
                                       double tolerance = 1e-9);
/// Draws n_theta random models and reports the union of their supports.
FourierSpectrumReport fourier_spectrum_random(int n_qubits, int encodings, int n_theta_draws,
                                              int grid_size, std::uint64_t seed);

/// Multi-feature variant: feature j is uploaded `encodings` times on qubit j.
struct LatticeReport {
  int features = 0;
  int encodings = 0;
  int grid_size = 0;
  std::size_t nonzero_count = 0;
  std::size_t admissible_count = 0;  // (2 d_enc + 1)^features
  double max_outside_band = 0.0;
};

LatticeReport fourier_lattice(int features, int encodings, int grid_size, std::uint64_t seed,
                              double tolerance = 1e-9);

}  // namespace hqfno::diag
