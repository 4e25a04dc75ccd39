#pragma once

// Partitioned hybrid 3D spectral convolution.
//
// Spectra use the one-sided rFFT layout (B, C, X, Y, Z/2+1) with an
// unnormalized forward transform and a 1/(XYZ) inverse. Retained modes form
// four (k_x, k_y) corners: corner q takes negative k_x when (q & 1) and
// negative k_y when (q & 2); k_z always runs over [0, m_z).

#include <array>
#include <cstdint>
#include <optional>
#include <random>

#include "hqfno/mixer.hpp"
#include "hqfno/tensor.hpp"

namespace hqfno::spectral {

struct ModeCounts {
  int x = 0;
  int y = 0;
  int z = 0;

  std::int64_t total() const { return static_cast<std::int64_t>(x) * y * z; }
  bool operator==(const ModeCounts&) const = default;
};

/// m = min(set, floor(X/2)), min(set, floor(Y/2)), min(set, Z/2 + 1).
ModeCounts effective_modes(const ModeCounts& set, std::size_t nx, std::size_t ny,
                           std::size_t nz);

/// B x C x X x Y x Z real field to its one-sided spectrum.
ComplexTensor rfft3(const RealTensor& field);
/// Inverse of rfft3. The k_z = 0 (and Nyquist) bins contribute only their
/// real part, so the output is exactly real for any input spectrum.
RealTensor irfft3(const ComplexTensor& spectrum, std::size_t nz);

using CornerBlocks = std::array<ComplexTensor, 4>;

/// Throws DomainError when any effective mode count is zero.
CornerBlocks gather_corners(const ComplexTensor& spectrum, const ModeCounts& modes);
/// Writes the blocks into `spectrum` (which keeps its other entries).
void scatter_corners(const CornerBlocks& blocks, ComplexTensor& spectrum);

/// Dense mode-wise weights for the classical output channels. Each corner has
/// shape (C_in, C_out, m_x^set, m_y^set, m_z^set). Effective sub-slices are
/// matched by signed frequency: positive axes use [0, m), negative axes use
/// [set - m, set).
struct SpectralWeights {
  int in_channels = 0;
  int out_channels = 0;
  ModeCounts set_modes;
  std::array<ComplexTensor, 4> corners;

  static SpectralWeights zeros(int in_channels, int out_channels, const ModeCounts& set);
  /// Real and imaginary parts ~ U[0, 1/(C_in * C_total)).
  static SpectralWeights random(int in_channels, int out_channels, int total_out,
                                const ModeCounts& set, std::mt19937_64& rng);
  std::int64_t real_parameter_count() const;
};

/// Non-owning view of the mode-shared mixer used for channels [0, C_q).
struct MixerBinding {
  const mixer::MixerParams* vqc = nullptr;
  const mixer::BottleneckParams* bottleneck = nullptr;
  const mixer::RobustScalerState* scaler = nullptr;

  bool present() const { return vqc != nullptr || bottleneck != nullptr; }
};

struct MixerGradients {
  std::optional<mixer::MixerParams> vqc;
  std::optional<mixer::BottleneckParams> bottleneck;
};

/// Flattens the first C_q channels of every retained mode into rows of
/// 2*C_q reals, corner-major, then batch, then (x, y, z) mode order.
std::vector<double> collect_mixer_rows(const CornerBlocks& u_hat, int c_q);

/// v(k) = [mixer(u_q(k)) ; u(k) R_c(k)] for every retained mode k.
CornerBlocks hybrid_spectral_conv(const CornerBlocks& u_hat, const SpectralWeights& weights,
                                  const MixerBinding& mixer, int c_q);

/// Adjoint of hybrid_spectral_conv. Gradients use the convention
/// dL/dRe + i dL/dIm. Accumulates into weight_grads / mixer_grads.
CornerBlocks hybrid_spectral_conv_backward(const CornerBlocks& u_hat,
                                           const SpectralWeights& weights,
                                           const MixerBinding& mixer, int c_q,
                                           const CornerBlocks& grad_v,
                                           SpectralWeights& weight_grads,
                                           MixerGradients& mixer_grads);

/// Plain dense mode-wise contraction v(k) = u(k) R(k) over all channels.
/// Reference implementation for the C_q = 0 equivalence checks.
CornerBlocks dense_spectral_conv(const CornerBlocks& u_hat, const SpectralWeights& weights);
CornerBlocks dense_spectral_conv_backward(const CornerBlocks& u_hat,
                                          const SpectralWeights& weights,
                                          const CornerBlocks& grad_v,
                                          SpectralWeights& weight_grads);

/// Real-space layer state kept between forward and backward.
struct SpectralCache {
  std::vector<std::size_t> input_shape;
  ModeCounts modes;
  CornerBlocks u_hat;
};

/// Full real-space path: rfft3 -> gather -> hybrid conv -> scatter -> irfft3.
/// When `training_scaler` is set, it receives exactly one EMA update from all
/// mode rows of the batch before the mixer runs; `mixer.scaler` should point
/// at the same state.
RealTensor spectral_layer_forward(const RealTensor& u, const SpectralWeights& weights,
                                  const MixerBinding& mixer, int c_q, SpectralCache* cache,
                                  mixer::RobustScalerState* training_scaler = nullptr);
/// Returns dL/du and accumulates parameter gradients.
RealTensor spectral_layer_backward(const SpectralCache& cache, const SpectralWeights& weights,
                                   const MixerBinding& mixer, int c_q,
                                   const RealTensor& grad_out, SpectralWeights& weight_grads,
                                   MixerGradients& mixer_grads);

}  // namespace hqfno::spectral
