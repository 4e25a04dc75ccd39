#pragma once

// Mode-shared spectral mixers. Both realizations map the 2*C_q real features
// [Re u_0..u_{Cq-1} | Im u_0..u_{Cq-1}] of one retained Fourier mode to 2*C_q
// real outputs laid out the same way, then reassembled as C_q complex values.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hqfno/layers.hpp"
#include "hqfno/qsim.hpp"
#include "hqfno/tensor.hpp"

namespace hqfno::mixer {

enum class ScalerMode { Training, Inference };

/// Feature-wise robust min-max scaler with EMA-tracked 2nd/98th percentiles.
struct RobustScalerState {
  std::vector<double> running_min;
  std::vector<double> running_max;
  double momentum = 0.05;
  double epsilon = 1e-6;
  bool initialized = false;
  ScalerMode mode = ScalerMode::Training;

  static RobustScalerState create(int features);
  int features() const { return static_cast<int>(running_min.size()); }
};

/// Linear-interpolation quantile (numpy's default "linear" method).
double quantile(std::vector<double> values, double q);

/// batch is row-major N x features. The first-ever update copies the batch
/// percentiles; later updates blend with the momentum.
void scaler_update(RobustScalerState& state, std::span<const double> batch, std::size_t rows);

/// pi * sigmoid(6 (r_norm - 0.5)), strictly inside (0, pi).
std::vector<double> scale_to_angles(const RobustScalerState& state, std::span<const double> r);
/// d(angle_i)/d(r_i); the running statistics are treated as constants.
std::vector<double> scale_to_angles_grad(const RobustScalerState& state,
                                         std::span<const double> r);

/// N_circ = 3 d (n_q - 1).
std::int64_t circuit_param_count(int n_qubits, int depth);
/// N_q = 3 d (n_q - 1) + 4 C_q n_q + n_q + 2 C_q.
std::int64_t quantum_param_count(int channels, int n_qubits, int depth);
/// Bias-free input projection, biased hidden/output layers.
std::int64_t bottleneck_param_count(int channels, int width, int depth);

/// Trainable state of the VQC mixer. theta holds, per depth layer, the
/// even pairs (0,1),(2,3),... then the odd pairs (1,2),(3,4),..., three
/// angles per pair in gate order [RZ first, IsingXY, RZ second].
struct MixerParams {
  int channels = 0;  // C_q
  int n_qubits = 0;
  int depth = 1;
  std::vector<double> theta;
  Linear encode;  // 2 C_q -> n_q
  Linear decode;  // n_q -> 2 C_q

  static MixerParams zeros(int channels, int n_qubits, int depth);
  /// theta ~ U[-pi/10, pi/10]; projections fan-in uniform.
  static MixerParams random(int channels, int n_qubits, int depth, std::mt19937_64& rng);
  std::int64_t trainable_count() const;
  MixerParams zeros_like() const { return zeros(channels, n_qubits, depth); }
};

/// Parameter-matched classical control: scaler -> in_proj -> GELU ->
/// (hidden -> GELU)* -> out_proj.
struct BottleneckParams {
  int channels = 0;
  int width = 1;
  int depth = 1;
  Linear in_proj;  // 2 C_q -> h, no bias
  std::vector<Linear> hidden;
  Linear out_proj;  // h -> 2 C_q

  static BottleneckParams zeros(int channels, int width, int depth);
  static BottleneckParams random(int channels, int width, int depth, std::mt19937_64& rng);
  std::int64_t trainable_count() const;
  BottleneckParams zeros_like() const { return zeros(channels, width, depth); }
};

/// Odd-even IsingXY pair list for one depth layer.
std::vector<std::pair<int, int>> odd_even_pairs(int n_qubits);

/// RX embedding of `angles`, QFT, depth-d mixer mesh, inverse QFT. Only the
/// mesh angles are flagged trainable.
qsim::CircuitSpec build_mixer_circuit(const MixerParams& params, std::span<const double> angles);

// Row-level kernels used by the spectral layer. `row` and outputs are the
// 2 C_q real layout described above.
std::vector<double> vqc_forward_row(const MixerParams& params, const RobustScalerState& scaler,
                                    std::span<const double> row);
/// Accumulates into `grads`; returns dL/d(row).
std::vector<double> vqc_backward_row(const MixerParams& params,
                                     const RobustScalerState& scaler,
                                     std::span<const double> row,
                                     std::span<const double> grad_out, MixerParams& grads);

std::vector<double> bottleneck_forward_row(const BottleneckParams& params,
                                           const RobustScalerState& scaler,
                                           std::span<const double> row);
std::vector<double> bottleneck_backward_row(const BottleneckParams& params,
                                            const RobustScalerState& scaler,
                                            std::span<const double> row,
                                            std::span<const double> grad_out,
                                            BottleneckParams& grads);

std::vector<Complex> vqc_forward(const MixerParams& params, const RobustScalerState& scaler,
                                 std::span<const Complex> coeffs);
std::vector<Complex> bottleneck_forward(const BottleneckParams& params,
                                        const RobustScalerState& scaler,
                                        std::span<const Complex> coeffs);

struct WidthMatch {
  int width = 0;
  int depth = 0;
  std::int64_t achieved = 0;
  std::int64_t target = 0;
  std::int64_t mismatch() const { return achieved - target; }
};

/// Exhaustive search over width in [1, 8 C_q] and depth in {1,2,3}; ties go
/// to the smaller depth, then the smaller width.
WidthMatch match_bottleneck_width(int channels, int n_qubits, int depth);

/// Counts every circuit simulation performed by vqc_forward_row.
std::uint64_t circuit_evaluations();
void reset_circuit_evaluations();

}  // namespace hqfno::mixer
