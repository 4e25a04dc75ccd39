#pragma once

// Independent reference implementations for the unit tests: dense gate
// matrices built from Kronecker products, a brute-force DFT, and a central
// finite difference helper.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "hqfno/qsim.hpp"
#include "hqfno/tensor.hpp"

namespace oracle {

using hqfno::Complex;
using Matrix = std::vector<std::vector<Complex>>;

inline std::vector<Complex> random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<Complex> v(std::size_t{1} << n);
  double norm = 0.0;
  for (auto& a : v) {
    a = {nd(rng), nd(rng)};
    norm += std::norm(a);
  }
  for (auto& a : v) a /= std::sqrt(norm);
  return v;
}

inline Matrix identity(std::size_t d) {
  Matrix m(d, std::vector<Complex>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) m[i][i] = 1.0;
  return m;
}

// Full 2^n matrix of a local operator `u` (2x2 or 4x4) acting on `qubits`.
// For two qubits the local index is 2 * bit(q0) + bit(q1).
inline Matrix embed(const Matrix& u, const std::vector<int>& qubits, int n) {
  const std::size_t dim = std::size_t{1} << n;
  Matrix m(dim, std::vector<Complex>(dim, 0.0));
  for (std::size_t col = 0; col < dim; ++col) {
    for (std::size_t row = 0; row < dim; ++row) {
      bool others_equal = true;
      for (int q = 0; q < n; ++q) {
        bool acted = false;
        for (int t : qubits) acted = acted || t == q;
        if (!acted && ((row >> q) & 1) != ((col >> q) & 1)) others_equal = false;
      }
      if (!others_equal) continue;
      std::size_t lr = 0, lc = 0;
      for (int t : qubits) {
        lr = 2 * lr + ((row >> t) & 1);
        lc = 2 * lc + ((col >> t) & 1);
      }
      m[row][col] = u[lr][lc];
    }
  }
  return m;
}

inline Matrix dense_gate(const hqfno::qsim::GateOp& g, int n) {
  using K = hqfno::qsim::GateKind;
  const double a = g.angle;
  const Complex i(0.0, 1.0);
  const double c = std::cos(a / 2), s = std::sin(a / 2);
  switch (g.kind) {
    case K::RX:
      return embed({{c, -i * s}, {-i * s, c}}, {g.targets[0]}, n);
    case K::RZ:
      return embed({{std::exp(-i * a / 2.0), 0.0}, {0.0, std::exp(i * a / 2.0)}}, {g.targets[0]}, n);
    case K::Hadamard: {
      const double h = 1.0 / std::sqrt(2.0);
      return embed({{h, h}, {h, -h}}, {g.targets[0]}, n);
    }
    case K::IsingXY:
      return embed({{1, 0, 0, 0}, {0, c, i * s, 0}, {0, i * s, c, 0}, {0, 0, 0, 1}},
                   {g.targets[0], g.targets[1]}, n);
    case K::ControlledPhase:
      return embed({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, std::exp(i * a)}},
                   {g.targets[0], g.targets[1]}, n);
    case K::Swap:
      return embed({{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}},
                   {g.targets[0], g.targets[1]}, n);
  }
  return identity(std::size_t{1} << n);
}

inline std::vector<Complex> apply_dense(const Matrix& m, const std::vector<Complex>& v) {
  std::vector<Complex> out(v.size(), 0.0);
  for (std::size_t r = 0; r < v.size(); ++r) {
    for (std::size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
  }
  return out;
}

// Unnormalized one-sided 3D DFT by direct summation, (B, C, X, Y, Z/2+1).
inline hqfno::ComplexTensor brute_rfft3(const hqfno::RealTensor& f) {
  const auto& s = f.shape();
  const std::size_t B = s[0], C = s[1], X = s[2], Y = s[3], Z = s[4], Zh = Z / 2 + 1;
  hqfno::ComplexTensor out({B, C, X, Y, Zh});
  const double tau = 2.0 * std::numbers::pi;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t kx = 0; kx < X; ++kx)
        for (std::size_t ky = 0; ky < Y; ++ky)
          for (std::size_t kz = 0; kz < Zh; ++kz) {
            Complex acc = 0.0;
            for (std::size_t x = 0; x < X; ++x)
              for (std::size_t y = 0; y < Y; ++y)
                for (std::size_t z = 0; z < Z; ++z) {
                  const double ph = -tau * (double(kx * x) / X + double(ky * y) / Y + double(kz * z) / Z);
                  acc += f[(((b * C + c) * X + x) * Y + y) * Z + z] * std::polar(1.0, ph);
                }
            out[(((b * C + c) * X + kx) * Y + ky) * Zh + kz] = acc;
          }
  return out;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
