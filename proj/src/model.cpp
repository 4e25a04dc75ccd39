#include "hqfno/model.hpp"

#include <cmath>
#include <numeric>

namespace hqfno::model {
namespace {

// (B, C_in, N) -> (B, C_out, N) pointwise channel map with a dense weight.
RealTensor pointwise_apply(std::span<const double> weight, std::span<const double> bias,
                           int in, int out, const RealTensor& x) {
  const auto& s = x.shape();
  if (s.size() != 5 || s[1] != static_cast<std::size_t>(in)) {
    throw ShapeError("pointwise layer expects " + std::to_string(in) + " channels, got " +
                     shape_string(s));
  }
  const auto g = Grid5::of(s);
  const std::size_t n = g.spatial();
  RealTensor y({g.b, static_cast<std::size_t>(out), g.x, g.y, g.z});
  for (std::size_t b = 0; b < g.b; ++b) {
    for (int o = 0; o < out; ++o) {
      double* yo = y.data() + (b * out + o) * n;
      const double b0 = bias.empty() ? 0.0 : bias[o];
      std::fill(yo, yo + n, b0);
      for (int i = 0; i < in; ++i) {
        const double w = weight[static_cast<std::size_t>(o) * in + i];
        if (w == 0.0) continue;
        const double* xi = x.data() + (b * in + i) * n;
        for (std::size_t p = 0; p < n; ++p) yo[p] += w * xi[p];
      }
    }
  }
  return y;
}

// Accumulates dW, db; returns dL/dx.
RealTensor pointwise_backward(std::span<const double> weight, int in, int out,
                              const RealTensor& x, const RealTensor& gy,
                              std::span<double> gweight, std::span<double> gbias) {
  const auto g = Grid5::of(x.shape());
  const std::size_t n = g.spatial();
  RealTensor gx(x.shape());
  for (std::size_t b = 0; b < g.b; ++b) {
    for (int o = 0; o < out; ++o) {
      const double* go = gy.data() + (b * out + o) * n;
      if (!gbias.empty()) {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) s += go[p];
        gbias[o] += s;
      }
      for (int i = 0; i < in; ++i) {
        const double* xi = x.data() + (b * in + i) * n;
        double* gxi = gx.data() + (b * in + i) * n;
        const double w = weight[static_cast<std::size_t>(o) * in + i];
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
          s += go[p] * xi[p];
          gxi[p] += w * go[p];
        }
        gweight[static_cast<std::size_t>(o) * in + i] += s;
      }
    }
  }
  return gx;
}

RealTensor linear_apply(const Linear& l, const RealTensor& x) {
  return pointwise_apply(l.weight, l.bias, l.in, l.out, x);
}

RealTensor pad_high(const RealTensor& u, int pad) {
  if (pad == 0) return u;
  const auto g = Grid5::of(u.shape());
  const std::size_t p = static_cast<std::size_t>(pad);
  RealTensor out({g.b, g.c, g.x + p, g.y + p, g.z + p});
  const auto go = Grid5::of(out.shape());
  for (std::size_t bc = 0; bc < g.b * g.c; ++bc) {
    for (std::size_t i = 0; i < g.x; ++i) {
      for (std::size_t j = 0; j < g.y; ++j) {
        const double* src = u.data() + bc * g.spatial() + (i * g.y + j) * g.z;
        double* dst = out.data() + bc * go.spatial() + (i * go.y + j) * go.z;
        std::copy(src, src + g.z, dst);
      }
    }
  }
  return out;
}

RealTensor unpad_high(const RealTensor& u, int pad) {
  if (pad == 0) return u;
  const auto g = Grid5::of(u.shape());
  const std::size_t p = static_cast<std::size_t>(pad);
  RealTensor out({g.b, g.c, g.x - p, g.y - p, g.z - p});
  const auto go = Grid5::of(out.shape());
  for (std::size_t bc = 0; bc < g.b * g.c; ++bc) {
    for (std::size_t i = 0; i < go.x; ++i) {
      for (std::size_t j = 0; j < go.y; ++j) {
        const double* src = u.data() + bc * g.spatial() + (i * g.y + j) * g.z;
        double* dst = out.data() + bc * go.spatial() + (i * go.y + j) * go.z;
        std::copy(src, src + go.z, dst);
      }
    }
  }
  return out;
}

void check_finite(const RealTensor& t, const std::string& where) {
  for (double v : t.storage()) {
    if (!std::isfinite(v)) throw NumericError("non-finite activation in " + where);
  }
}

std::span<double> as_reals(ComplexTensor& t) {
  return {reinterpret_cast<double*>(t.data()), 2 * t.size()};
}

std::vector<std::size_t> complex_shape(const ComplexTensor& t) {
  auto s = t.shape();
  s.push_back(2);
  return s;
}

void push_linear(std::vector<NamedSpan>& out, const std::string& name, Linear& l) {
  out.push_back({name + ".weight",
                 {static_cast<std::size_t>(l.out), static_cast<std::size_t>(l.in)},
                 l.weight});
  if (l.has_bias) out.push_back({name + ".bias", {static_cast<std::size_t>(l.out)}, l.bias});
}

void push_linear_shape(std::vector<TensorShape>& out, const std::string& name, int in, int o,
                       bool bias = true) {
  out.push_back({name + ".weight", {static_cast<std::size_t>(o), static_cast<std::size_t>(in)}});
  if (bias) out.push_back({name + ".bias", {static_cast<std::size_t>(o)}});
}

// Decoder widths: C -> w -> w -> 2.
std::vector<std::pair<int, int>> decoder_dims(const ModelConfig& c) {
  return {{c.width, c.decoder_width}, {c.decoder_width, c.decoder_width}, {c.decoder_width, 2}};
}

spectral::MixerBinding binding(const FourierLayer& layer, const mixer::RobustScalerState* s) {
  spectral::MixerBinding b;
  if (layer.vqc) b.vqc = &*layer.vqc;
  if (layer.bottleneck) b.bottleneck = &*layer.bottleneck;
  b.scaler = s;
  return b;
}

ModelOutput forward_impl(const ModelParams& params, ModelParams* trainable,
                         const RealTensor& input, ForwardCache* cache) {
  const auto& cfg = params.config;
  const auto g = Grid5::of(input.shape());
  if (g.c != static_cast<std::size_t>(cfg.inputs.count())) {
    throw ShapeError("model expects " + std::to_string(cfg.inputs.count()) +
                     " input channels, got " + std::to_string(g.c));
  }
  RealTensor lifted = linear_apply(params.lift, input);
  RealTensor u = pad_high(lifted, cfg.padding);
  const auto gp = Grid5::of(u.shape());
  const auto modes = spectral::effective_modes(cfg.modes, gp.x, gp.y, gp.z);
  if (cache) {
    cache->input = input;
    cache->lifted = std::move(lifted);
    cache->layers.assign(params.layers.size(), {});
    cache->effective_modes.assign(params.layers.size(), modes);
  }

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    RealTensor skip = linear_apply(layer.skip, u);
    mixer::RobustScalerState local_scaler;
    mixer::RobustScalerState* update = nullptr;
    const mixer::RobustScalerState* use = &layer.scaler;
    if (cfg.c_q > 0) {
      if (trainable != nullptr) {
        update = &trainable->layers[l].scaler;
        use = update;
      } else if (!layer.scaler.initialized) {
        local_scaler = layer.scaler;
        local_scaler.mode = mixer::ScalerMode::Training;
        update = &local_scaler;
        use = update;
      }
    }
    spectral::SpectralCache* sc = cache ? &cache->layers[l].spectral : nullptr;
    RealTensor spec = spectral::spectral_layer_forward(u, layer.spectral, binding(layer, use),
                                                       cfg.c_q, sc, update);
    for (std::size_t i = 0; i < skip.size(); ++i) skip[i] += spec[i];
    const bool last = l + 1 == params.layers.size();
    RealTensor next = skip;
    if (!last) {
      for (auto& v : next.storage()) v = gelu(v);
    }
    check_finite(next, "Fourier layer " + std::to_string(l));
    if (cache) {
      cache->layers[l].input = std::move(u);
      cache->layers[l].preact = std::move(skip);
    }
    u = std::move(next);
  }

  RealTensor trunk = unpad_high(u, cfg.padding);
  std::vector<RealTensor> pre;
  RealTensor h = trunk;
  for (std::size_t k = 0; k < params.decoder.size(); ++k) {
    const auto& d = params.decoder[k];
    const auto w = d.effective_weight();
    RealTensor z = pointwise_apply(w, d.v.bias, d.v.in, d.v.out, h);
    if (k + 1 < params.decoder.size()) {
      h = z;
      for (auto& v : h.storage()) v = silu(v);
      pre.push_back(std::move(z));
    } else {
      h = std::move(z);
    }
  }
  check_finite(h, "decoder");

  const auto go = Grid5::of(h.shape());
  ModelOutput out{RealTensor({go.b, 1, go.x, go.y, go.z}), RealTensor({go.b, 1, go.x, go.y, go.z})};
  const std::size_t n = go.spatial();
  for (std::size_t b = 0; b < go.b; ++b) {
    std::copy_n(h.data() + (2 * b) * n, n, out.temperature.data() + b * n);
    std::copy_n(h.data() + (2 * b + 1) * n, n, out.alpha.data() + b * n);
  }
  if (cache) {
    cache->trunk = std::move(trunk);
    cache->decoder_pre = std::move(pre);
  }
  return out;
}

}  // namespace

std::string to_string(MixerKind kind) {
  switch (kind) {
    case MixerKind::None: return "none";
    case MixerKind::Vqc: return "vqc";
    case MixerKind::Bottleneck: return "bottleneck";
  }
  return "?";
}

MixerKind mixer_kind_from_string(const std::string& name) {
  if (name == "none") return MixerKind::None;
  if (name == "vqc") return MixerKind::Vqc;
  if (name == "bottleneck") return MixerKind::Bottleneck;
  throw ConfigError("unknown mixer kind '" + name + "' (none | vqc | bottleneck)");
}

void ModelConfig::validate() const {
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (width < 1) throw ConfigError("width must be >= 1");
  if (modes.x < 1 || modes.y < 1 || modes.z < 1) throw ConfigError("modes must be >= 1");
  if (c_q < 0 || c_q > width) {
    throw ConfigError("C_q = " + std::to_string(c_q) + " must lie in [0, C = " +
                      std::to_string(width) + "]");
  }
  if ((mixer == MixerKind::None) != (c_q == 0)) {
    throw ConfigError("mixer kind '" + to_string(mixer) + "' is inconsistent with C_q = " +
                      std::to_string(c_q));
  }
  if (n_qubits < 0 || depth < 1) throw ConfigError("n_q must be >= 0 and depth >= 1");
  if (mixer == MixerKind::Vqc && qubits() > 20) throw ConfigError("n_q > 20 is not simulable");
  if (padding < 0) throw ConfigError("padding must be >= 0");
  if (inputs.count() == 0) throw ConfigError("at least one input feature is required");
  if (decoder_width < 1) throw ConfigError("decoder width must be >= 1");
  if (bottleneck_width < 0 || bottleneck_depth < 0) {
    throw ConfigError("bottleneck width/depth must be >= 0");
  }
}

std::pair<int, int> ModelConfig::bottleneck_shape() const {
  if (bottleneck_width > 0 && bottleneck_depth > 0) return {bottleneck_width, bottleneck_depth};
  const auto m = mixer::match_bottleneck_width(c_q, qubits(), depth);
  return {bottleneck_width > 0 ? bottleneck_width : m.width,
          bottleneck_depth > 0 ? bottleneck_depth : m.depth};
}

std::vector<double> WeightNormLinear::effective_weight() const {
  std::vector<double> w(v.weight.size());
  for (int o = 0; o < v.out; ++o) {
    double norm = 0.0;
    for (int i = 0; i < v.in; ++i) norm += v.w(o, i) * v.w(o, i);
    norm = std::sqrt(norm);
    const double s = norm > 0.0 ? g[o] / norm : 0.0;
    for (int i = 0; i < v.in; ++i) w[static_cast<std::size_t>(o) * v.in + i] = s * v.w(o, i);
  }
  return w;
}

void WeightNormLinear::reset_scale() {
  for (int o = 0; o < v.out; ++o) {
    double norm = 0.0;
    for (int i = 0; i < v.in; ++i) norm += v.w(o, i) * v.w(o, i);
    g[o] = std::sqrt(norm);
  }
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
  config.validate();
  ModelParams p;
  p.config = config;
  const int c = config.width;
  p.lift = Linear(config.inputs.count(), c);
  for (int l = 0; l < config.layers; ++l) {
    FourierLayer layer;
    layer.skip = Linear(c, c);
    layer.spectral = spectral::SpectralWeights::zeros(c, c - config.c_q, config.modes);
    if (config.mixer == MixerKind::Vqc) {
      layer.vqc = mixer::MixerParams::zeros(config.c_q, config.qubits(), config.depth);
    } else if (config.mixer == MixerKind::Bottleneck) {
      const auto [w, d] = config.bottleneck_shape();
      layer.bottleneck = mixer::BottleneckParams::zeros(config.c_q, w, d);
    }
    layer.scaler = mixer::RobustScalerState::create(2 * config.c_q);
    p.layers.push_back(std::move(layer));
  }
  for (const auto& [in, out] : decoder_dims(config)) p.decoder.emplace_back(in, out);
  return p;
}

ModelParams ModelParams::random(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = zeros(config);
  std::mt19937_64 rng(seed);
  const int c = config.width;
  p.lift.init_uniform(rng);
  for (auto& layer : p.layers) {
    layer.skip.init_uniform(rng);
    layer.spectral =
        spectral::SpectralWeights::random(c, c - config.c_q, c, config.modes, rng);
    if (layer.vqc) {
      layer.vqc = mixer::MixerParams::random(config.c_q, config.qubits(), config.depth, rng);
    }
    if (layer.bottleneck) {
      layer.bottleneck = mixer::BottleneckParams::random(
          config.c_q, layer.bottleneck->width, layer.bottleneck->depth, rng);
    }
  }
  for (auto& d : p.decoder) {
    d.v.init_uniform(rng);
    d.reset_scale();
  }
  return p;
}

std::vector<NamedSpan> ModelParams::parameters() {
  std::vector<NamedSpan> out;
  push_linear(out, "lift", lift);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = layers[l];
    const std::string p = "layers." + std::to_string(l);
    push_linear(out, p + ".skip", layer.skip);
    for (int q = 0; q < 4; ++q) {
      auto& t = layer.spectral.corners[q];
      out.push_back({p + ".spectral.corner" + std::to_string(q), complex_shape(t), as_reals(t)});
    }
    if (layer.vqc) {
      auto& m = *layer.vqc;
      out.push_back({p + ".vqc.theta", {m.theta.size()}, m.theta});
      push_linear(out, p + ".vqc.encode", m.encode);
      push_linear(out, p + ".vqc.decode", m.decode);
    }
    if (layer.bottleneck) {
      auto& m = *layer.bottleneck;
      push_linear(out, p + ".bottleneck.in_proj", m.in_proj);
      for (std::size_t h = 0; h < m.hidden.size(); ++h) {
        push_linear(out, p + ".bottleneck.hidden." + std::to_string(h), m.hidden[h]);
      }
      push_linear(out, p + ".bottleneck.out_proj", m.out_proj);
    }
  }
  for (std::size_t k = 0; k < decoder.size(); ++k) {
    const std::string p = "decoder." + std::to_string(k);
    push_linear(out, p + ".v", decoder[k].v);
    out.push_back({p + ".g", {decoder[k].g.size()}, decoder[k].g});
  }
  return out;
}

std::vector<NamedSpan> ModelParams::buffers() {
  std::vector<NamedSpan> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& s = layers[l].scaler;
    const std::string p = "layers." + std::to_string(l) + ".scaler";
    out.push_back({p + ".running_min", {s.running_min.size()}, s.running_min});
    out.push_back({p + ".running_max", {s.running_max.size()}, s.running_max});
  }
  return out;
}

std::int64_t ModelParams::trainable_count() {
  std::int64_t n = 0;
  for (const auto& p : parameters()) n += static_cast<std::int64_t>(p.values.size());
  return n;
}

std::size_t TensorShape::size() const { return Tensor<double>::element_count(shape); }

std::vector<TensorShape> parameter_layout(const ModelConfig& config) {
  config.validate();
  std::vector<TensorShape> out;
  const int c = config.width;
  push_linear_shape(out, "lift", config.inputs.count(), c);
  const auto mx = static_cast<std::size_t>(config.modes.x);
  const auto my = static_cast<std::size_t>(config.modes.y);
  const auto mz = static_cast<std::size_t>(config.modes.z);
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "layers." + std::to_string(l);
    push_linear_shape(out, p + ".skip", c, c);
    for (int q = 0; q < 4; ++q) {
      out.push_back({p + ".spectral.corner" + std::to_string(q),
                     {static_cast<std::size_t>(c), static_cast<std::size_t>(c - config.c_q), mx,
                      my, mz, 2}});
    }
    if (config.mixer == MixerKind::Vqc) {
      const int n = config.qubits();
      out.push_back({p + ".vqc.theta",
                     {static_cast<std::size_t>(mixer::circuit_param_count(n, config.depth))}});
      push_linear_shape(out, p + ".vqc.encode", 2 * config.c_q, n);
      push_linear_shape(out, p + ".vqc.decode", n, 2 * config.c_q);
    } else if (config.mixer == MixerKind::Bottleneck) {
      const auto [w, d] = config.bottleneck_shape();
      push_linear_shape(out, p + ".bottleneck.in_proj", 2 * config.c_q, w, false);
      for (int h = 0; h + 1 < d; ++h) {
        push_linear_shape(out, p + ".bottleneck.hidden." + std::to_string(h), w, w);
      }
      push_linear_shape(out, p + ".bottleneck.out_proj", w, 2 * config.c_q);
    }
  }
  const auto dims = decoder_dims(config);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const std::string p = "decoder." + std::to_string(k);
    push_linear_shape(out, p + ".v", dims[k].first, dims[k].second);
    out.push_back({p + ".g", {static_cast<std::size_t>(dims[k].second)}});
  }
  return out;
}

std::int64_t ParamBreakdown::spectral_branch() const {
  return static_cast<std::int64_t>(layers) * (spectral_per_layer + quantum_per_layer);
}

ParamBreakdown count_params(const ModelConfig& config) {
  config.validate();
  ParamBreakdown r;
  const std::int64_t c = config.width;
  const std::int64_t cq = config.c_q;
  r.layers = config.layers;
  r.spectral_per_layer = 8 * c * (c - cq) * config.modes.total();
  if (config.mixer == MixerKind::Vqc) {
    r.quantum_per_layer = mixer::quantum_param_count(config.c_q, config.qubits(), config.depth);
  } else if (config.mixer == MixerKind::Bottleneck) {
    const auto [w, d] = config.bottleneck_shape();
    r.quantum_per_layer = mixer::bottleneck_param_count(config.c_q, w, d);
  }
  r.pointwise = config.layers * (c * c + c);
  r.lifting = config.inputs.count() * c + c;
  for (const auto& [in, out] : decoder_dims(config)) {
    r.decoder += static_cast<std::int64_t>(in) * out + 2 * out;
  }
  r.total = r.spectral_branch() + r.pointwise + r.lifting + r.decoder;
  for (const auto& t : parameter_layout(config)) {
    r.enumerated_total += static_cast<std::int64_t>(t.size());
  }
  if (r.total != r.enumerated_total) {
    throw NumericError("closed-form count " + std::to_string(r.total) +
                       " != enumerated count " + std::to_string(r.enumerated_total));
  }
  return r;
}

spectral::ModeCounts layer_modes(const ModelConfig& config, std::size_t nx, std::size_t ny,
                                 std::size_t nz) {
  const auto p = static_cast<std::size_t>(config.padding);
  return spectral::effective_modes(config.modes, nx + p, ny + p, nz + p);
}

ModelOutput forward(const ModelParams& params, const RealTensor& input, ForwardCache* cache) {
  return forward_impl(params, nullptr, input, cache);
}

ModelOutput forward_train(ModelParams& params, const RealTensor& input, ForwardCache& cache) {
  return forward_impl(params, &params, input, &cache);
}

void backward(const ModelParams& params, const ForwardCache& cache, const RealTensor& grad_t,
              const RealTensor& grad_alpha, ModelParams& grads) {
  const auto& cfg = params.config;
  const auto go = Grid5::of(grad_t.shape());
  if (grad_alpha.shape() != grad_t.shape() || go.c != 1) {
    throw ShapeError("output gradients must both be (B, 1, X, Y, Z)");
  }
  const std::size_t n = go.spatial();
  RealTensor gh({go.b, 2, go.x, go.y, go.z});
  for (std::size_t b = 0; b < go.b; ++b) {
    std::copy_n(grad_t.data() + b * n, n, gh.data() + (2 * b) * n);
    std::copy_n(grad_alpha.data() + b * n, n, gh.data() + (2 * b + 1) * n);
  }

  // Decoder, last layer first.
  for (std::size_t k = params.decoder.size(); k-- > 0;) {
    const auto& d = params.decoder[k];
    auto& gd = grads.decoder[k];
    RealTensor x;
    if (k == 0) {
      x = cache.trunk;
    } else {
      x = cache.decoder_pre[k - 1];
      for (auto& v : x.storage()) v = silu(v);
    }
    const auto w = d.effective_weight();
    std::vector<double> gw(w.size(), 0.0);
    RealTensor gx = pointwise_backward(w, d.v.in, d.v.out, x, gh, gw, gd.v.bias);
    // W = g v / |v| per row.
    for (int o = 0; o < d.v.out; ++o) {
      double norm = 0.0;
      for (int i = 0; i < d.v.in; ++i) norm += d.v.w(o, i) * d.v.w(o, i);
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      double dot = 0.0;
      for (int i = 0; i < d.v.in; ++i) dot += gw[o * d.v.in + i] * d.v.w(o, i) / norm;
      gd.g[o] += dot;
      const double s = d.g[o] / norm;
      for (int i = 0; i < d.v.in; ++i) {
        gd.v.w(o, i) += s * (gw[o * d.v.in + i] - dot * d.v.w(o, i) / norm);
      }
    }
    if (k > 0) {
      const auto& z = cache.decoder_pre[k - 1];
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= silu_grad(z[i]);
    }
    gh = std::move(gx);
  }

  RealTensor gu = pad_high(gh, cfg.padding);
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& layer = params.layers[l];
    auto& gl = grads.layers[l];
    const auto& lc = cache.layers[l];
    if (l + 1 < params.layers.size()) {
      for (std::size_t i = 0; i < gu.size(); ++i) gu[i] *= gelu_grad(lc.preact[i]);
    }
    RealTensor gx_skip = pointwise_backward(layer.skip.weight, layer.skip.in, layer.skip.out,
                                            lc.input, gu, gl.skip.weight, gl.skip.bias);
    spectral::MixerGradients mg;
    RealTensor gx_spec = spectral::spectral_layer_backward(
        lc.spectral, layer.spectral, binding(layer, &layer.scaler), cfg.c_q, gu, gl.spectral,
        mg);
    if (mg.vqc) {
      auto& dst = *gl.vqc;
      for (std::size_t i = 0; i < dst.theta.size(); ++i) dst.theta[i] += mg.vqc->theta[i];
      for (std::size_t i = 0; i < dst.encode.weight.size(); ++i) {
        dst.encode.weight[i] += mg.vqc->encode.weight[i];
      }
      for (std::size_t i = 0; i < dst.encode.bias.size(); ++i) {
        dst.encode.bias[i] += mg.vqc->encode.bias[i];
      }
      for (std::size_t i = 0; i < dst.decode.weight.size(); ++i) {
        dst.decode.weight[i] += mg.vqc->decode.weight[i];
      }
      for (std::size_t i = 0; i < dst.decode.bias.size(); ++i) {
        dst.decode.bias[i] += mg.vqc->decode.bias[i];
      }
    }
    if (mg.bottleneck) {
      auto& dst = *gl.bottleneck;
      auto add = [](Linear& a, const Linear& b) {
        for (std::size_t i = 0; i < a.weight.size(); ++i) a.weight[i] += b.weight[i];
        for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += b.bias[i];
      };
      add(dst.in_proj, mg.bottleneck->in_proj);
      for (std::size_t h = 0; h < dst.hidden.size(); ++h) add(dst.hidden[h], mg.bottleneck->hidden[h]);
      add(dst.out_proj, mg.bottleneck->out_proj);
    }
    for (std::size_t i = 0; i < gx_skip.size(); ++i) gx_skip[i] += gx_spec[i];
    gu = std::move(gx_skip);
  }

  RealTensor glift = unpad_high(gu, cfg.padding);
  pointwise_backward(params.lift.weight, params.lift.in, params.lift.out, cache.input, glift,
                     grads.lift.weight, grads.lift.bias);
}

}  // namespace hqfno::model
