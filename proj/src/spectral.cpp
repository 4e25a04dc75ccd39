#include "hqfno/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

namespace hqfno::spectral {
namespace {

// The 3D transform is composed from 1D passes: r2c along z, then complex
// FFTs along y and x. Inverse runs the complex passes backward, then c2r
// along z (which reads only the real part of the DC/Nyquist z-bins).
enum class Pass { R2CZ, C2RZ, FwdY, BwdY, FwdX, BwdX };

using PlanKey = std::tuple<Pass, std::size_t, std::size_t, std::size_t, std::size_t>;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Pass pass, std::size_t bc, std::size_t nx, std::size_t ny, std::size_t nz,
                double* real, fftw_complex* cplx) {
    std::lock_guard<std::mutex> lock(mutex_);
    const PlanKey key{pass, bc, nx, ny, nz};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const auto kz = static_cast<int>(nz / 2 + 1);
    const int x = static_cast<int>(nx), y = static_cast<int>(ny), z = static_cast<int>(nz);
    const int b = static_cast<int>(bc);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    switch (pass) {
      case Pass::R2CZ: {
        fftw_iodim dim{z, 1, 1};
        fftw_iodim many{b * x * y, z, kz};
        plan = fftw_plan_guru_dft_r2c(1, &dim, 1, &many, real, cplx, flags);
        break;
      }
      case Pass::C2RZ: {
        fftw_iodim dim{z, 1, 1};
        fftw_iodim many{b * x * y, kz, z};
        plan = fftw_plan_guru_dft_c2r(1, &dim, 1, &many, cplx, real, flags);
        break;
      }
      case Pass::FwdY:
      case Pass::BwdY: {
        fftw_iodim dim{y, kz, kz};
        fftw_iodim many[2] = {{b * x, y * kz, y * kz}, {kz, 1, 1}};
        plan = fftw_plan_guru_dft(1, &dim, 2, many, cplx, cplx,
                                  pass == Pass::FwdY ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        break;
      }
      case Pass::FwdX:
      case Pass::BwdX: {
        fftw_iodim dim{x, y * kz, y * kz};
        fftw_iodim many[2] = {{b, x * y * kz, x * y * kz}, {y * kz, 1, 1}};
        plan = fftw_plan_guru_dft(1, &dim, 2, many, cplx, cplx,
                                  pass == Pass::FwdX ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        break;
      }
    }
    if (plan == nullptr) throw NumericError("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

// Weight of a one-sided z-bin in the real inverse: 1 for DC and Nyquist, 2 otherwise.
double one_sided_weight(std::size_t kz, std::size_t nz) {
  if (kz == 0) return 1.0;
  if (nz % 2 == 0 && kz == nz / 2) return 1.0;
  return 2.0;
}

void check_corner_set(const CornerBlocks& blocks) {
  const auto& s0 = blocks[0].shape();
  for (const auto& b : blocks) {
    if (b.shape() != s0) throw ShapeError("corner blocks must share one shape");
  }
}

struct CornerGeometry {
  std::size_t b, c, mx, my, mz;
  std::size_t modes() const { return mx * my * mz; }
};

CornerGeometry geometry(const ComplexTensor& block) {
  const auto g = Grid5::of(block.shape());
  return {g.b, g.c, g.x, g.y, g.z};
}

// Offset into the stored (set-size) weight axis for corner q.
std::array<std::size_t, 2> weight_offsets(int q, const ModeCounts& set, const CornerGeometry& g) {
  const std::size_t ox = (q & 1) ? static_cast<std::size_t>(set.x) - g.mx : 0;
  const std::size_t oy = (q & 2) ? static_cast<std::size_t>(set.y) - g.my : 0;
  return {ox, oy};
}

void check_weights(const SpectralWeights& w, const CornerGeometry& g, int c_in, int c_out) {
  if (w.in_channels != c_in || w.out_channels != c_out) {
    throw ShapeError("spectral weights are (" + std::to_string(w.in_channels) + ", " +
                     std::to_string(w.out_channels) + "), expected (" + std::to_string(c_in) +
                     ", " + std::to_string(c_out) + ")");
  }
  if (g.mx > static_cast<std::size_t>(w.set_modes.x) ||
      g.my > static_cast<std::size_t>(w.set_modes.y) ||
      g.mz > static_cast<std::size_t>(w.set_modes.z)) {
    throw ShapeError("effective modes exceed the stored weight budget");
  }
}

// v[:, out_offset + o] += sum_c u[:, c] * R[c, o] over the effective slice.
void contract_forward(const CornerBlocks& u, const SpectralWeights& w, std::size_t out_offset,
                      CornerBlocks& v) {
  const auto g = geometry(u[0]);
  const auto set = w.set_modes;
  const auto wy = static_cast<std::size_t>(set.y), wz = static_cast<std::size_t>(set.z);
  const std::size_t wmodes = static_cast<std::size_t>(set.total());
  const auto c_out = static_cast<std::size_t>(w.out_channels);
  const std::size_t vc = v[0].dim(1);
  for (int q = 0; q < 4; ++q) {
    const auto [ox, oy] = weight_offsets(q, set, g);
    const Complex* ud = u[q].data();
    const Complex* wd = w.corners[q].data();
    Complex* vd = v[q].data();
    for (std::size_t b = 0; b < g.b; ++b) {
      for (std::size_t c = 0; c < g.c; ++c) {
        const Complex* urow = ud + (b * g.c + c) * g.modes();
        for (std::size_t o = 0; o < c_out; ++o) {
          const Complex* wblk = wd + (c * c_out + o) * wmodes;
          Complex* vrow = vd + (b * vc + out_offset + o) * g.modes();
          std::size_t m = 0;
          for (std::size_t i = 0; i < g.mx; ++i) {
            for (std::size_t j = 0; j < g.my; ++j) {
              const Complex* wline = wblk + ((i + ox) * wy + (j + oy)) * wz;
              for (std::size_t k = 0; k < g.mz; ++k, ++m) vrow[m] += urow[m] * wline[k];
            }
          }
        }
      }
    }
  }
}

// gU += gV R^H, gR += U^H gV (elementwise per mode).
void contract_backward(const CornerBlocks& u, const SpectralWeights& w, std::size_t out_offset,
                       const CornerBlocks& gv, CornerBlocks& gu, SpectralWeights& gw) {
  const auto g = geometry(u[0]);
  const auto set = w.set_modes;
  const auto wy = static_cast<std::size_t>(set.y), wz = static_cast<std::size_t>(set.z);
  const std::size_t wmodes = static_cast<std::size_t>(set.total());
  const auto c_out = static_cast<std::size_t>(w.out_channels);
  const std::size_t vc = gv[0].dim(1);
  for (int q = 0; q < 4; ++q) {
    const auto [ox, oy] = weight_offsets(q, set, g);
    const Complex* ud = u[q].data();
    const Complex* wd = w.corners[q].data();
    const Complex* gvd = gv[q].data();
    Complex* gud = gu[q].data();
    Complex* gwd = gw.corners[q].data();
    for (std::size_t b = 0; b < g.b; ++b) {
      for (std::size_t c = 0; c < g.c; ++c) {
        const Complex* urow = ud + (b * g.c + c) * g.modes();
        Complex* gurow = gud + (b * g.c + c) * g.modes();
        for (std::size_t o = 0; o < c_out; ++o) {
          const Complex* wblk = wd + (c * c_out + o) * wmodes;
          Complex* gwblk = gwd + (c * c_out + o) * wmodes;
          const Complex* gvrow = gvd + (b * vc + out_offset + o) * g.modes();
          std::size_t m = 0;
          for (std::size_t i = 0; i < g.mx; ++i) {
            for (std::size_t j = 0; j < g.my; ++j) {
              const std::size_t base = ((i + ox) * wy + (j + oy)) * wz;
              for (std::size_t k = 0; k < g.mz; ++k, ++m) {
                gurow[m] += gvrow[m] * std::conj(wblk[base + k]);
                gwblk[base + k] += std::conj(urow[m]) * gvrow[m];
              }
            }
          }
        }
      }
    }
  }
}

CornerBlocks zero_blocks(const CornerGeometry& g, std::size_t channels) {
  CornerBlocks out;
  for (auto& blk : out) blk = ComplexTensor({g.b, channels, g.mx, g.my, g.mz});
  return out;
}

void check_mixer(const MixerBinding& mixer, int c_q, int channels) {
  if (c_q < 0 || c_q > channels) {
    throw ConfigError("C_q = " + std::to_string(c_q) + " must lie in [0, C = " +
                      std::to_string(channels) + "]");
  }
  if (c_q > 0 && !mixer.present()) throw ConfigError("C_q > 0 requires a mixer");
  if (c_q > 0 && mixer.scaler == nullptr) throw ConfigError("mixer binding lacks a scaler");
  if (mixer.vqc && mixer.vqc->channels != c_q) throw ConfigError("VQC mixer width != C_q");
  if (mixer.bottleneck && mixer.bottleneck->channels != c_q) {
    throw ConfigError("bottleneck mixer width != C_q");
  }
}

}  // namespace

ModeCounts effective_modes(const ModeCounts& set, std::size_t nx, std::size_t ny,
                           std::size_t nz) {
  return {std::min(set.x, static_cast<int>(nx / 2)), std::min(set.y, static_cast<int>(ny / 2)),
          std::min(set.z, static_cast<int>(nz / 2 + 1))};
}

ComplexTensor rfft3(const RealTensor& field) {
  const auto g = Grid5::of(field.shape());
  if (g.x < 2 || g.y < 2 || g.z < 2) throw ShapeError("rfft3 needs X, Y, Z >= 2");
  const std::size_t kz = g.z / 2 + 1;
  ComplexTensor out({g.b, g.c, g.x, g.y, kz});
  const std::size_t bc = g.b * g.c;
  auto* in = const_cast<double*>(field.data());  // FFTW r2c does not modify its input
  auto* cplx = as_fftw(out.data());
  auto& cache = plan_cache();
  fftw_execute_dft_r2c(cache.get(Pass::R2CZ, bc, g.x, g.y, g.z, in, cplx), in, cplx);
  fftw_execute_dft(cache.get(Pass::FwdY, bc, g.x, g.y, g.z, in, cplx), cplx, cplx);
  fftw_execute_dft(cache.get(Pass::FwdX, bc, g.x, g.y, g.z, in, cplx), cplx, cplx);
  return out;
}

RealTensor irfft3(const ComplexTensor& spectrum, std::size_t nz) {
  const auto g = Grid5::of(spectrum.shape());
  if (g.z != nz / 2 + 1) {
    throw ShapeError("spectrum has " + std::to_string(g.z) + " z-bins, expected " +
                     std::to_string(nz / 2 + 1) + " for Z = " + std::to_string(nz));
  }
  if (g.x < 2 || g.y < 2 || nz < 2) throw ShapeError("irfft3 needs X, Y, Z >= 2");
  ComplexTensor work = spectrum;
  RealTensor out({g.b, g.c, g.x, g.y, nz});
  const std::size_t bc = g.b * g.c;
  auto* cplx = as_fftw(work.data());
  auto* real = out.data();
  auto& cache = plan_cache();
  fftw_execute_dft(cache.get(Pass::BwdX, bc, g.x, g.y, nz, real, cplx), cplx, cplx);
  fftw_execute_dft(cache.get(Pass::BwdY, bc, g.x, g.y, nz, real, cplx), cplx, cplx);
  fftw_execute_dft_c2r(cache.get(Pass::C2RZ, bc, g.x, g.y, nz, real, cplx), cplx, real);
  const double scale = 1.0 / static_cast<double>(g.x * g.y * nz);
  for (auto& v : out.storage()) v *= scale;
  return out;
}

CornerBlocks gather_corners(const ComplexTensor& spectrum, const ModeCounts& modes) {
  const auto g = Grid5::of(spectrum.shape());
  if (modes.x < 1 || modes.y < 1 || modes.z < 1) {
    throw DomainError("degenerate grid: an effective mode count is zero");
  }
  const auto mx = static_cast<std::size_t>(modes.x), my = static_cast<std::size_t>(modes.y),
             mz = static_cast<std::size_t>(modes.z);
  if (2 * mx > g.x || 2 * my > g.y || mz > g.z) {
    throw ShapeError("mode budget exceeds the spectrum extent");
  }
  CornerBlocks out = zero_blocks({g.b, g.c, mx, my, mz}, g.c);
  for (int q = 0; q < 4; ++q) {
    const std::size_t x0 = (q & 1) ? g.x - mx : 0;
    const std::size_t y0 = (q & 2) ? g.y - my : 0;
    Complex* dst = out[q].data();
    for (std::size_t bc = 0; bc < g.b * g.c; ++bc) {
      const Complex* src = spectrum.data() + bc * g.spatial();
      for (std::size_t i = 0; i < mx; ++i) {
        for (std::size_t j = 0; j < my; ++j) {
          const Complex* line = src + ((x0 + i) * g.y + (y0 + j)) * g.z;
          std::copy(line, line + mz, dst);
          dst += mz;
        }
      }
    }
  }
  return out;
}

void scatter_corners(const CornerBlocks& blocks, ComplexTensor& spectrum) {
  check_corner_set(blocks);
  const auto g = Grid5::of(spectrum.shape());
  const auto cg = geometry(blocks[0]);
  if (cg.b != g.b || cg.c != g.c) throw ShapeError("corner blocks do not match the spectrum");
  if (2 * cg.mx > g.x || 2 * cg.my > g.y || cg.mz > g.z) {
    throw ShapeError("corner blocks exceed the spectrum extent");
  }
  for (int q = 0; q < 4; ++q) {
    const std::size_t x0 = (q & 1) ? g.x - cg.mx : 0;
    const std::size_t y0 = (q & 2) ? g.y - cg.my : 0;
    const Complex* src = blocks[q].data();
    for (std::size_t bc = 0; bc < g.b * g.c; ++bc) {
      Complex* dst = spectrum.data() + bc * g.spatial();
      for (std::size_t i = 0; i < cg.mx; ++i) {
        for (std::size_t j = 0; j < cg.my; ++j) {
          Complex* line = dst + ((x0 + i) * g.y + (y0 + j)) * g.z;
          std::copy(src, src + cg.mz, line);
          src += cg.mz;
        }
      }
    }
  }
}

SpectralWeights SpectralWeights::zeros(int in_channels, int out_channels, const ModeCounts& set) {
  if (in_channels < 1 || out_channels < 0) throw ConfigError("invalid spectral channel counts");
  if (set.x < 1 || set.y < 1 || set.z < 1) throw ConfigError("set modes must be positive");
  SpectralWeights w;
  w.in_channels = in_channels;
  w.out_channels = out_channels;
  w.set_modes = set;
  for (auto& c : w.corners) {
    c = ComplexTensor({static_cast<std::size_t>(in_channels),
                       static_cast<std::size_t>(out_channels), static_cast<std::size_t>(set.x),
                       static_cast<std::size_t>(set.y), static_cast<std::size_t>(set.z)});
  }
  return w;
}

SpectralWeights SpectralWeights::random(int in_channels, int out_channels, int total_out,
                                        const ModeCounts& set, std::mt19937_64& rng) {
  SpectralWeights w = zeros(in_channels, out_channels, set);
  const double scale = 1.0 / (static_cast<double>(in_channels) * total_out);
  std::uniform_real_distribution<double> dist(0.0, scale);
  for (auto& c : w.corners) {
    for (auto& v : c.storage()) {
      const double re = dist(rng);
      v = Complex{re, dist(rng)};
    }
  }
  return w;
}

std::int64_t SpectralWeights::real_parameter_count() const {
  std::int64_t n = 0;
  for (const auto& c : corners) n += 2 * static_cast<std::int64_t>(c.size());
  return n;
}

std::vector<double> collect_mixer_rows(const CornerBlocks& u_hat, int c_q) {
  check_corner_set(u_hat);
  const auto g = geometry(u_hat[0]);
  const auto cq = static_cast<std::size_t>(c_q);
  if (cq > g.c) throw ConfigError("C_q exceeds the channel count");
  const std::size_t row_len = 2 * cq;
  std::vector<double> rows(4 * g.b * g.modes() * row_len);
  std::size_t r = 0;
  for (int q = 0; q < 4; ++q) {
    const Complex* ud = u_hat[q].data();
    for (std::size_t b = 0; b < g.b; ++b) {
      for (std::size_t m = 0; m < g.modes(); ++m, ++r) {
        double* row = rows.data() + r * row_len;
        for (std::size_t c = 0; c < cq; ++c) {
          const Complex v = ud[(b * g.c + c) * g.modes() + m];
          row[c] = v.real();
          row[cq + c] = v.imag();
        }
      }
    }
  }
  return rows;
}

CornerBlocks hybrid_spectral_conv(const CornerBlocks& u_hat, const SpectralWeights& weights,
                                  const MixerBinding& mixer, int c_q) {
  check_corner_set(u_hat);
  const auto g = geometry(u_hat[0]);
  check_mixer(mixer, c_q, static_cast<int>(g.c));
  check_weights(weights, g, static_cast<int>(g.c), static_cast<int>(g.c) - c_q);
  CornerBlocks v = zero_blocks(g, g.c);
  if (c_q < static_cast<int>(g.c)) contract_forward(u_hat, weights, static_cast<std::size_t>(c_q), v);
  if (c_q == 0) return v;

  const auto cq = static_cast<std::size_t>(c_q);
  const auto rows = collect_mixer_rows(u_hat, c_q);
  const std::size_t row_len = 2 * cq;
  std::size_t r = 0;
  for (int q = 0; q < 4; ++q) {
    Complex* vd = v[q].data();
    for (std::size_t b = 0; b < g.b; ++b) {
      for (std::size_t m = 0; m < g.modes(); ++m, ++r) {
        const std::span<const double> row(rows.data() + r * row_len, row_len);
        const auto y = mixer.vqc ? mixer::vqc_forward_row(*mixer.vqc, *mixer.scaler, row)
                                 : mixer::bottleneck_forward_row(*mixer.bottleneck,
                                                                 *mixer.scaler, row);
        for (std::size_t c = 0; c < cq; ++c) {
          vd[(b * g.c + c) * g.modes() + m] = Complex{y[c], y[cq + c]};
        }
      }
    }
  }
  return v;
}

CornerBlocks hybrid_spectral_conv_backward(const CornerBlocks& u_hat,
                                           const SpectralWeights& weights,
                                           const MixerBinding& mixer, int c_q,
                                           const CornerBlocks& grad_v,
                                           SpectralWeights& weight_grads,
                                           MixerGradients& mixer_grads) {
  check_corner_set(u_hat);
  const auto g = geometry(u_hat[0]);
  check_mixer(mixer, c_q, static_cast<int>(g.c));
  CornerBlocks gu = zero_blocks(g, g.c);
  if (c_q < static_cast<int>(g.c)) {
    contract_backward(u_hat, weights, static_cast<std::size_t>(c_q), grad_v, gu, weight_grads);
  }
  if (c_q == 0) return gu;

  if (mixer.vqc && !mixer_grads.vqc) mixer_grads.vqc = mixer.vqc->zeros_like();
  if (mixer.bottleneck && !mixer_grads.bottleneck) {
    mixer_grads.bottleneck = mixer.bottleneck->zeros_like();
  }
  const auto cq = static_cast<std::size_t>(c_q);
  const auto rows = collect_mixer_rows(u_hat, c_q);
  const std::size_t row_len = 2 * cq;
  std::vector<double> gy(row_len);
  std::size_t r = 0;
  for (int q = 0; q < 4; ++q) {
    const Complex* gvd = grad_v[q].data();
    Complex* gud = gu[q].data();
    for (std::size_t b = 0; b < g.b; ++b) {
      for (std::size_t m = 0; m < g.modes(); ++m, ++r) {
        for (std::size_t c = 0; c < cq; ++c) {
          const Complex gv = gvd[(b * g.c + c) * g.modes() + m];
          gy[c] = gv.real();
          gy[cq + c] = gv.imag();
        }
        const std::span<const double> row(rows.data() + r * row_len, row_len);
        const auto gr =
            mixer.vqc ? mixer::vqc_backward_row(*mixer.vqc, *mixer.scaler, row, gy,
                                                *mixer_grads.vqc)
                      : mixer::bottleneck_backward_row(*mixer.bottleneck, *mixer.scaler, row, gy,
                                                       *mixer_grads.bottleneck);
        for (std::size_t c = 0; c < cq; ++c) {
          gud[(b * g.c + c) * g.modes() + m] += Complex{gr[c], gr[cq + c]};
        }
      }
    }
  }
  return gu;
}

CornerBlocks dense_spectral_conv(const CornerBlocks& u_hat, const SpectralWeights& weights) {
  check_corner_set(u_hat);
  const auto g = geometry(u_hat[0]);
  check_weights(weights, g, static_cast<int>(g.c), weights.out_channels);
  CornerBlocks v = zero_blocks(g, static_cast<std::size_t>(weights.out_channels));
  contract_forward(u_hat, weights, 0, v);
  return v;
}

CornerBlocks dense_spectral_conv_backward(const CornerBlocks& u_hat,
                                          const SpectralWeights& weights,
                                          const CornerBlocks& grad_v,
                                          SpectralWeights& weight_grads) {
  const auto g = geometry(u_hat[0]);
  CornerBlocks gu = zero_blocks(g, g.c);
  contract_backward(u_hat, weights, 0, grad_v, gu, weight_grads);
  return gu;
}

RealTensor spectral_layer_forward(const RealTensor& u, const SpectralWeights& weights,
                                  const MixerBinding& mixer, int c_q, SpectralCache* cache,
                                  mixer::RobustScalerState* training_scaler) {
  const auto g = Grid5::of(u.shape());
  const ModeCounts modes = effective_modes(weights.set_modes, g.x, g.y, g.z);
  ComplexTensor spec = rfft3(u);
  CornerBlocks u_hat = gather_corners(spec, modes);
  if (training_scaler != nullptr && c_q > 0) {
    const auto rows = collect_mixer_rows(u_hat, c_q);
    mixer::scaler_update(*training_scaler, rows, rows.size() / (2 * static_cast<std::size_t>(c_q)));
  }
  const CornerBlocks v_hat = hybrid_spectral_conv(u_hat, weights, mixer, c_q);
  spec.fill(Complex{0.0, 0.0});
  scatter_corners(v_hat, spec);
  if (cache != nullptr) {
    cache->input_shape = u.shape();
    cache->modes = modes;
    cache->u_hat = std::move(u_hat);
  }
  return irfft3(spec, g.z);
}

RealTensor spectral_layer_backward(const SpectralCache& cache, const SpectralWeights& weights,
                                   const MixerBinding& mixer, int c_q,
                                   const RealTensor& grad_out, SpectralWeights& weight_grads,
                                   MixerGradients& mixer_grads) {
  const auto g = Grid5::of(cache.input_shape);
  const double n = static_cast<double>(g.spatial());

  // Adjoint of irfft3: rfft3 scaled by (one-sided weight) / N.
  ComplexTensor g_spec = rfft3(grad_out);
  const std::size_t kz = g.z / 2 + 1;
  for (std::size_t i = 0; i < g_spec.size(); ++i) {
    g_spec[i] *= one_sided_weight(i % kz, g.z) / n;
  }
  const CornerBlocks g_v = gather_corners(g_spec, cache.modes);
  const CornerBlocks g_u = hybrid_spectral_conv_backward(cache.u_hat, weights, mixer, c_q, g_v,
                                                         weight_grads, mixer_grads);

  // Adjoint of rfft3: N * irfft3 after dividing out the one-sided weight.
  g_spec.fill(Complex{0.0, 0.0});
  scatter_corners(g_u, g_spec);
  for (std::size_t i = 0; i < g_spec.size(); ++i) {
    g_spec[i] *= n / one_sided_weight(i % kz, g.z);
  }
  return irfft3(g_spec, g.z);
}

}  // namespace hqfno::spectral
