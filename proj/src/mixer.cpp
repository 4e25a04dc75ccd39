#include "hqfno/mixer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>

namespace hqfno::mixer {
namespace {

std::atomic<std::uint64_t> g_circuit_evaluations{0};

void check_row(std::span<const double> row, int channels) {
  if (row.size() != static_cast<std::size_t>(2 * channels)) {
    throw ShapeError("mixer row must have 2*C_q = " + std::to_string(2 * channels) +
                     " entries, got " + std::to_string(row.size()));
  }
  for (double v : row) {
    if (!std::isfinite(v)) throw DataError("non-finite Fourier coefficient in mixer input");
  }
}

void require_initialized(const RobustScalerState& s) {
  if (!s.initialized) throw StateError("robust scaler used before its first update");
}

struct VqcTrace {
  std::vector<double> scaled;     // r~ in (0, pi)
  std::vector<double> embedding;  // E r~ + b
  std::vector<double> z;          // <Z_j>
};

VqcTrace vqc_trace(const MixerParams& p, const RobustScalerState& scaler,
                   std::span<const double> row) {
  check_row(row, p.channels);
  VqcTrace t;
  t.scaled = scale_to_angles(scaler, row);
  t.embedding.assign(static_cast<std::size_t>(p.n_qubits), 0.0);
  p.encode.forward(t.scaled, t.embedding);
  const auto circuit = build_mixer_circuit(p, t.embedding);
  t.z = qsim::expect_z_all(qsim::run(circuit));
  return t;
}

struct BottleneckTrace {
  std::vector<double> scaled;
  std::vector<std::vector<double>> pre;   // pre-activation per hidden stage
  std::vector<std::vector<double>> post;  // GELU outputs per hidden stage
};

BottleneckTrace bottleneck_trace(const BottleneckParams& p, const RobustScalerState& scaler,
                                 std::span<const double> row) {
  check_row(row, p.channels);
  BottleneckTrace t;
  t.scaled = scale_to_angles(scaler, row);
  const auto h = static_cast<std::size_t>(p.width);
  std::vector<double> pre(h);
  p.in_proj.forward(t.scaled, pre);
  for (std::size_t stage = 0; stage <= p.hidden.size(); ++stage) {
    if (stage > 0) p.hidden[stage - 1].forward(t.post.back(), pre);
    std::vector<double> post(h);
    for (std::size_t i = 0; i < h; ++i) post[i] = gelu(pre[i]);
    t.pre.push_back(pre);
    t.post.push_back(std::move(post));
  }
  return t;
}

std::vector<double> to_row(std::span<const Complex> coeffs) {
  const std::size_t c = coeffs.size();
  std::vector<double> row(2 * c);
  for (std::size_t i = 0; i < c; ++i) {
    row[i] = coeffs[i].real();
    row[c + i] = coeffs[i].imag();
  }
  return row;
}

std::vector<Complex> from_row(std::span<const double> row) {
  const std::size_t c = row.size() / 2;
  std::vector<Complex> out(c);
  for (std::size_t i = 0; i < c; ++i) out[i] = Complex{row[i], row[c + i]};
  return out;
}

}  // namespace

RobustScalerState RobustScalerState::create(int features) {
  RobustScalerState s;
  s.running_min.assign(static_cast<std::size_t>(features), 0.0);
  s.running_max.assign(static_cast<std::size_t>(features), 0.0);
  return s;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

void scaler_update(RobustScalerState& state, std::span<const double> batch, std::size_t rows) {
  if (state.mode != ScalerMode::Training) {
    throw StateError("scaler_update called in inference mode");
  }
  const auto features = static_cast<std::size_t>(state.features());
  if (rows == 0) throw DomainError("scaler_update needs at least one row");
  if (batch.size() != rows * features) throw ShapeError("scaler batch shape mismatch");
  for (double v : batch) {
    if (!std::isfinite(v)) throw DataError("non-finite value in scaler batch");
  }
  std::vector<double> column(rows);
  const double mu = state.momentum;
  for (std::size_t f = 0; f < features; ++f) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = batch[r * features + f];
    const double lo = quantile(column, 0.02);
    const double hi = quantile(column, 0.98);
    if (!state.initialized) {
      state.running_min[f] = lo;
      state.running_max[f] = hi;
    } else {
      state.running_min[f] = (1.0 - mu) * state.running_min[f] + mu * lo;
      state.running_max[f] = (1.0 - mu) * state.running_max[f] + mu * hi;
    }
  }
  state.initialized = true;
}

std::vector<double> scale_to_angles(const RobustScalerState& state, std::span<const double> r) {
  require_initialized(state);
  if (r.size() != state.running_min.size()) throw ShapeError("scaler feature count mismatch");
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double span = (state.running_max[i] - state.running_min[i]) + state.epsilon;
    const double norm = (r[i] - state.running_min[i]) / span;
    out[i] = std::numbers::pi * sigmoid(6.0 * (norm - 0.5));
  }
  return out;
}

std::vector<double> scale_to_angles_grad(const RobustScalerState& state,
                                         std::span<const double> r) {
  require_initialized(state);
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double span = (state.running_max[i] - state.running_min[i]) + state.epsilon;
    const double s = sigmoid(6.0 * ((r[i] - state.running_min[i]) / span - 0.5));
    out[i] = std::numbers::pi * s * (1.0 - s) * 6.0 / span;
  }
  return out;
}

std::int64_t circuit_param_count(int n_qubits, int depth) {
  return 3LL * depth * (n_qubits - 1);
}

std::int64_t quantum_param_count(int channels, int n_qubits, int depth) {
  const std::int64_t c = channels;
  const std::int64_t n = n_qubits;
  return circuit_param_count(n_qubits, depth) + 4 * c * n + n + 2 * c;
}

std::int64_t bottleneck_param_count(int channels, int width, int depth) {
  const std::int64_t c2 = 2LL * channels;
  const std::int64_t h = width;
  return c2 * h + (depth - 1) * (h * h + h) + (h * c2 + c2);
}

MixerParams MixerParams::zeros(int channels, int n_qubits, int depth) {
  if (channels < 1 || n_qubits < 1 || depth < 1) {
    throw ConfigError("mixer needs C_q >= 1, n_q >= 1, d >= 1");
  }
  MixerParams p;
  p.channels = channels;
  p.n_qubits = n_qubits;
  p.depth = depth;
  p.theta.assign(static_cast<std::size_t>(circuit_param_count(n_qubits, depth)), 0.0);
  p.encode = Linear(2 * channels, n_qubits);
  p.decode = Linear(n_qubits, 2 * channels);
  return p;
}

MixerParams MixerParams::random(int channels, int n_qubits, int depth, std::mt19937_64& rng) {
  MixerParams p = zeros(channels, n_qubits, depth);
  std::uniform_real_distribution<double> angle(-std::numbers::pi / 10.0, std::numbers::pi / 10.0);
  for (auto& t : p.theta) t = angle(rng);
  p.encode.init_uniform(rng);
  p.decode.init_uniform(rng);
  return p;
}

std::int64_t MixerParams::trainable_count() const {
  return static_cast<std::int64_t>(theta.size() + encode.parameter_count() +
                                   decode.parameter_count());
}

BottleneckParams BottleneckParams::zeros(int channels, int width, int depth) {
  if (channels < 1 || width < 1 || depth < 1) {
    throw ConfigError("bottleneck needs C_q >= 1, width >= 1, depth >= 1");
  }
  BottleneckParams p;
  p.channels = channels;
  p.width = width;
  p.depth = depth;
  p.in_proj = Linear(2 * channels, width, /*with_bias=*/false);
  for (int i = 1; i < depth; ++i) p.hidden.emplace_back(width, width);
  p.out_proj = Linear(width, 2 * channels);
  return p;
}

BottleneckParams BottleneckParams::random(int channels, int width, int depth,
                                          std::mt19937_64& rng) {
  BottleneckParams p = zeros(channels, width, depth);
  p.in_proj.init_uniform(rng);
  for (auto& h : p.hidden) h.init_uniform(rng);
  p.out_proj.init_uniform(rng);
  return p;
}

std::int64_t BottleneckParams::trainable_count() const {
  std::size_t n = in_proj.parameter_count() + out_proj.parameter_count();
  for (const auto& h : hidden) n += h.parameter_count();
  return static_cast<std::int64_t>(n);
}

std::vector<std::pair<int, int>> odd_even_pairs(int n_qubits) {
  std::vector<std::pair<int, int>> pairs;
  for (int q = 0; q + 1 < n_qubits; q += 2) pairs.emplace_back(q, q + 1);
  for (int q = 1; q + 1 < n_qubits; q += 2) pairs.emplace_back(q, q + 1);
  return pairs;
}

qsim::CircuitSpec build_mixer_circuit(const MixerParams& params,
                                      std::span<const double> angles) {
  const int n = params.n_qubits;
  if (angles.size() != static_cast<std::size_t>(n)) {
    throw ShapeError("embedding angle count must equal n_q");
  }
  for (double a : angles) {
    if (!std::isfinite(a)) throw DomainError("non-finite embedding angle");
  }
  if (params.theta.size() != static_cast<std::size_t>(circuit_param_count(n, params.depth))) {
    throw ShapeError("theta length does not match 3 d (n_q - 1)");
  }
  qsim::CircuitSpec c;
  c.n_qubits = n;
  c.ops.reserve(static_cast<std::size_t>(n) * 8 + params.theta.size());
  c.trainable.reserve(c.ops.capacity());
  for (int q = 0; q < n; ++q) c.append(qsim::GateOp::rx(q, angles[q]));
  c.append(qsim::build_qft(n));
  const auto pairs = odd_even_pairs(n);
  std::size_t t = 0;
  for (int layer = 0; layer < params.depth; ++layer) {
    for (const auto& [a, b] : pairs) {
      c.append(qsim::GateOp::rz(a, params.theta[t++]), true);
      c.append(qsim::GateOp::ising_xy(a, b, params.theta[t++]), true);
      c.append(qsim::GateOp::rz(b, params.theta[t++]), true);
    }
  }
  c.append(qsim::build_inverse_qft(n));
  return c;
}

std::vector<double> vqc_forward_row(const MixerParams& params, const RobustScalerState& scaler,
                                    std::span<const double> row) {
  const VqcTrace t = vqc_trace(params, scaler, row);
  g_circuit_evaluations.fetch_add(1, std::memory_order_relaxed);
  std::vector<double> y(static_cast<std::size_t>(2 * params.channels));
  params.decode.forward(t.z, y);
  return y;
}

std::vector<double> vqc_backward_row(const MixerParams& params,
                                     const RobustScalerState& scaler,
                                     std::span<const double> row,
                                     std::span<const double> grad_out, MixerParams& grads) {
  const VqcTrace t = vqc_trace(params, scaler, row);
  const auto n = static_cast<std::size_t>(params.n_qubits);

  std::vector<double> gz(n);
  params.decode.backward(t.z, grad_out, grads.decode, gz);

  const auto circuit = build_mixer_circuit(params, t.embedding);
  const auto angle_grads = qsim::adjoint_angle_gradients(circuit, qsim::Statevector(params.n_qubits), gz);
  // The first n ops are the RX embedding; trainable ops map onto theta in order.
  std::vector<double> g_embed(angle_grads.begin(), angle_grads.begin() + static_cast<long>(n));
  const auto trainable = circuit.trainable_ops();
  for (std::size_t i = 0; i < trainable.size(); ++i) grads.theta[i] += angle_grads[trainable[i]];

  std::vector<double> g_scaled(t.scaled.size());
  params.encode.backward(t.scaled, g_embed, grads.encode, g_scaled);
  const auto dscale = scale_to_angles_grad(scaler, row);
  for (std::size_t i = 0; i < g_scaled.size(); ++i) g_scaled[i] *= dscale[i];
  return g_scaled;
}

std::vector<double> bottleneck_forward_row(const BottleneckParams& params,
                                           const RobustScalerState& scaler,
                                           std::span<const double> row) {
  const BottleneckTrace t = bottleneck_trace(params, scaler, row);
  std::vector<double> y(static_cast<std::size_t>(2 * params.channels));
  params.out_proj.forward(t.post.back(), y);
  return y;
}

std::vector<double> bottleneck_backward_row(const BottleneckParams& params,
                                            const RobustScalerState& scaler,
                                            std::span<const double> row,
                                            std::span<const double> grad_out,
                                            BottleneckParams& grads) {
  const BottleneckTrace t = bottleneck_trace(params, scaler, row);
  const auto h = static_cast<std::size_t>(params.width);
  std::vector<double> g(h);
  params.out_proj.backward(t.post.back(), grad_out, grads.out_proj, g);
  std::vector<double> g_prev(h);
  for (std::size_t stage = t.pre.size(); stage-- > 0;) {
    for (std::size_t i = 0; i < h; ++i) g[i] *= gelu_grad(t.pre[stage][i]);
    if (stage > 0) {
      params.hidden[stage - 1].backward(t.post[stage - 1], g, grads.hidden[stage - 1], g_prev);
      std::swap(g, g_prev);
    }
  }
  std::vector<double> g_scaled(t.scaled.size());
  params.in_proj.backward(t.scaled, g, grads.in_proj, g_scaled);
  const auto dscale = scale_to_angles_grad(scaler, row);
  for (std::size_t i = 0; i < g_scaled.size(); ++i) g_scaled[i] *= dscale[i];
  return g_scaled;
}

std::vector<Complex> vqc_forward(const MixerParams& params, const RobustScalerState& scaler,
                                 std::span<const Complex> coeffs) {
  if (coeffs.size() != static_cast<std::size_t>(params.channels)) {
    throw ShapeError("expected C_q complex coefficients");
  }
  return from_row(vqc_forward_row(params, scaler, to_row(coeffs)));
}

std::vector<Complex> bottleneck_forward(const BottleneckParams& params,
                                        const RobustScalerState& scaler,
                                        std::span<const Complex> coeffs) {
  if (coeffs.size() != static_cast<std::size_t>(params.channels)) {
    throw ShapeError("expected C_q complex coefficients");
  }
  return from_row(bottleneck_forward_row(params, scaler, to_row(coeffs)));
}

WidthMatch match_bottleneck_width(int channels, int n_qubits, int depth) {
  WidthMatch best;
  best.target = quantum_param_count(channels, n_qubits, depth);
  std::int64_t best_gap = std::numeric_limits<std::int64_t>::max();
  for (int d = 1; d <= 3; ++d) {
    for (int h = 1; h <= 8 * channels; ++h) {
      const std::int64_t count = bottleneck_param_count(channels, h, d);
      const std::int64_t gap = std::abs(count - best.target);
      if (gap < best_gap) {  // strict: earlier (smaller d, then h) wins ties
        best_gap = gap;
        best.width = h;
        best.depth = d;
        best.achieved = count;
      }
    }
  }
  return best;
}

std::uint64_t circuit_evaluations() { return g_circuit_evaluations.load(); }
void reset_circuit_evaluations() { g_circuit_evaluations.store(0); }

}  // namespace hqfno::mixer
