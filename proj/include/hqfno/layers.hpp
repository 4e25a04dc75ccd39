#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "hqfno/errors.hpp"

namespace hqfno {

/// Exact GELU, x * Phi(x).
inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

inline double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double silu(double x) { return x * sigmoid(x); }

inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

/// Fully connected layer y = W x + b, W stored row-major (out x in).
struct Linear {
  int in = 0;
  int out = 0;
  bool has_bias = true;
  std::vector<double> weight;
  std::vector<double> bias;

  Linear() = default;
  Linear(int in_features, int out_features, bool with_bias = true)
      : in(in_features),
        out(out_features),
        has_bias(with_bias),
        weight(static_cast<std::size_t>(in_features) * out_features, 0.0),
        bias(with_bias ? static_cast<std::size_t>(out_features) : 0, 0.0) {}

  std::size_t parameter_count() const { return weight.size() + bias.size(); }

  double& w(int o, int i) { return weight[static_cast<std::size_t>(o) * in + i]; }
  double w(int o, int i) const { return weight[static_cast<std::size_t>(o) * in + i]; }

  void forward(std::span<const double> x, std::span<double> y) const {
    for (int o = 0; o < out; ++o) {
      double acc = has_bias ? bias[o] : 0.0;
      const double* row = weight.data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = acc;
    }
  }

  /// Accumulates parameter gradients into `grads` and writes dL/dx.
  void backward(std::span<const double> x, std::span<const double> gy, Linear& grads,
                std::span<double> gx) const {
    for (int i = 0; i < in; ++i) gx[i] = 0.0;
    for (int o = 0; o < out; ++o) {
      const double g = gy[o];
      if (has_bias) grads.bias[o] += g;
      const double* row = weight.data() + static_cast<std::size_t>(o) * in;
      double* grow = grads.weight.data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) {
        grow[i] += g * x[i];
        gx[i] += g * row[i];
      }
    }
  }

  /// Uniform(-1/sqrt(in), 1/sqrt(in)) for weights and biases.
  void init_uniform(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : weight) v = dist(rng);
    for (auto& v : bias) v = dist(rng);
  }

  Linear zeros_like() const { return Linear(in, out, has_bias); }
};

}  // namespace hqfno
