#pragma once

// LP-FNO backbone with optional hybrid (VQC) or bottleneck spectral mixers.
//
// Input (B, C_in, X, Y, Z) -> lift -> zero-pad the high end of each axis ->
// L Fourier layers u <- act(W u + K(u)) -> unpad -> SiLU decoder -> (T, alpha).

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hqfno/layers.hpp"
#include "hqfno/mixer.hpp"
#include "hqfno/spectral.hpp"
#include "hqfno/tensor.hpp"

namespace hqfno::model {

enum class MixerKind { None, Vqc, Bottleneck };

std::string to_string(MixerKind kind);
MixerKind mixer_kind_from_string(const std::string& name);

struct InputFeatures {
  bool x = true;
  bool y = true;
  bool z = true;
  bool power = true;
  bool speed = true;
  bool h_star = true;

  int count() const { return int(x) + int(y) + int(z) + int(power) + int(speed) + int(h_star); }
};

struct ModelConfig {
  int layers = 3;
  int width = 32;
  spectral::ModeCounts modes{25, 20, 15};
  int c_q = 0;
  int n_qubits = 0;  // 0 means n_q = C_q
  int depth = 1;
  int padding = 9;
  MixerKind mixer = MixerKind::None;
  InputFeatures inputs;
  int decoder_width = 32;
  // Bottleneck shape; 0 picks the budget-matched width/depth.
  int bottleneck_width = 0;
  int bottleneck_depth = 0;

  int qubits() const { return n_qubits > 0 ? n_qubits : c_q; }
  /// Throws ConfigError on inconsistent knobs (e.g. C_q > 0 with no mixer).
  void validate() const;
  /// Resolved (width, depth) of the bottleneck mixer.
  std::pair<int, int> bottleneck_shape() const;
};

/// Decoder layer W = g * v / ||v|| per output row, plus bias.
struct WeightNormLinear {
  Linear v;
  std::vector<double> g;

  WeightNormLinear() = default;
  WeightNormLinear(int in, int out) : v(in, out), g(static_cast<std::size_t>(out), 0.0) {}

  std::vector<double> effective_weight() const;
  /// Sets g to the current row norms of v so W = v at init.
  void reset_scale();
  std::size_t parameter_count() const { return v.parameter_count() + g.size(); }
  WeightNormLinear zeros_like() const { return WeightNormLinear(v.in, v.out); }
};

struct FourierLayer {
  Linear skip;
  spectral::SpectralWeights spectral;
  std::optional<mixer::MixerParams> vqc;
  std::optional<mixer::BottleneckParams> bottleneck;
  mixer::RobustScalerState scaler;
};

/// Named view of one stored real tensor.
struct NamedSpan {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<double> values;
};

struct ModelParams {
  ModelConfig config;
  Linear lift;
  std::vector<FourierLayer> layers;
  std::vector<WeightNormLinear> decoder;

  static ModelParams zeros(const ModelConfig& config);
  static ModelParams random(const ModelConfig& config, std::uint64_t seed);

  /// Every trainable scalar, in a fixed order. Complex tensors appear as
  /// interleaved (re, im) doubles.
  std::vector<NamedSpan> parameters();
  /// Scaler running statistics (non-trainable, serialized).
  std::vector<NamedSpan> buffers();
  std::int64_t trainable_count();
};

struct ParamBreakdown {
  std::int64_t spectral_per_layer = 0;
  std::int64_t quantum_per_layer = 0;
  std::int64_t pointwise = 0;
  std::int64_t lifting = 0;
  std::int64_t decoder = 0;
  std::int64_t total = 0;
  std::int64_t enumerated_total = 0;
  int layers = 0;

  /// Spectral plus mixer parameters over all layers.
  std::int64_t spectral_branch() const;
};

struct TensorShape {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t size() const;
};

/// Layout of every trainable tensor ModelParams stores for `config`, in the
/// order parameters() returns them. Needs no allocation of the tensors.
std::vector<TensorShape> parameter_layout(const ModelConfig& config);

/// Closed-form counts next to the count enumerated from parameter_layout;
/// throws NumericError if the two disagree.
ParamBreakdown count_params(const ModelConfig& config);

struct ModelOutput {
  RealTensor temperature;  // (B, 1, X, Y, Z), normalized by T_ref
  RealTensor alpha;        // (B, 1, X, Y, Z)
};

struct LayerCache {
  RealTensor input;
  RealTensor preact;
  spectral::SpectralCache spectral;
};

struct ForwardCache {
  RealTensor input;
  RealTensor lifted;
  std::vector<LayerCache> layers;
  RealTensor trunk;  // unpadded output of the Fourier stack
  std::vector<RealTensor> decoder_pre;
  std::vector<spectral::ModeCounts> effective_modes;
};

/// Effective modes each Fourier layer uses for an unpadded X x Y x Z input.
spectral::ModeCounts layer_modes(const ModelConfig& config, std::size_t nx, std::size_t ny,
                                 std::size_t nz);

/// Inference forward; scaler statistics are never touched. A mixer whose
/// scaler has never been fitted is evaluated with statistics of the current
/// call only.
ModelOutput forward(const ModelParams& params, const RealTensor& input,
                    ForwardCache* cache = nullptr);
/// Training forward: applies exactly one scaler EMA update per hybrid layer.
ModelOutput forward_train(ModelParams& params, const RealTensor& input, ForwardCache& cache);

/// Accumulates dL/dparams into `grads` (created with ModelParams::zeros).
void backward(const ModelParams& params, const ForwardCache& cache, const RealTensor& grad_t,
              const RealTensor& grad_alpha, ModelParams& grads);

// Checkpoints: "HQFNOCKP", u32 version, u64 manifest length, JSON manifest,
// then little-endian f64 payload.
std::vector<std::uint8_t> save_checkpoint(ModelParams& params);
ModelParams load_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint_file(ModelParams& params, const std::string& path);
ModelParams load_checkpoint_file(const std::string& path);

}  // namespace hqfno::model
