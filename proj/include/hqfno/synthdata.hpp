#pragma once

// Analytic stand-in for melt-pool simulation data: process-window sampling in
// (H*, P), a moving point-source (Rosenthal) temperature field, a smooth
// surface-depression VoF field, and the masking used by the loss and metrics.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hqfno/model.hpp"
#include "hqfno/tensor.hpp"

namespace hqfno::synthdata {

struct MaterialConstants {
  double absorptivity = 0.35;     // eta
  double density = 4420.0;        // kg/m^3
  double heat_capacity = 750.0;   // J/(kg K)
  double melt_delta = 1573.0;     // Delta T_m, K
  double diffusivity = 8.1e-6;    // m^2/s
  double beam_sigma = 50e-6;      // m
  double latent_heat = 3.45e5;    // J/kg, not used by h_star
  double t_boil = 3123.0;         // K
  double t_solidus = 1873.0;      // K
  double t_liquidus = 1923.0;     // K, not a published value
  double t_ref = 3000.0;          // K
  double t_ambient = 300.0;       // K

  double conductivity() const { return density * heat_capacity * diffusivity; }
  void validate() const;
  /// FNV-1a over the constants, for sample manifests.
  std::uint64_t hash() const;
};

struct ProcessPoint {
  double power = 0.0;  // W
  double speed = 0.0;  // m/s
  double h_star = 0.0;
};

/// H* = eta P / (rho C_p dT_m sqrt(pi D sigma^3 V)).
double h_star(double power, double speed, const MaterialConstants& mat);
/// Closed-form inverse of h_star for V.
double speed_for(double h_star, double power, const MaterialConstants& mat);

enum class SamplingMode { Grid, LatinHypercube };

struct WindowSpec {
  double h_min = 2.0;
  double h_max = 20.0;
  double p_min = 40.0;
  double p_max = 190.0;
  double v_min = 0.1;
  double v_max = 1.0;
  SamplingMode mode = SamplingMode::LatinHypercube;
};

struct SamplingResult {
  std::vector<ProcessPoint> points;
  std::size_t rejected = 0;
};

/// Draws n candidates uniformly in (H*, P) (a near-square grid, or a Latin
/// hypercube) and keeps those with V in [v_min, v_max]. Throws SamplingError
/// if none survive.
SamplingResult sample_window(std::size_t n, const WindowSpec& window,
                             const MaterialConstants& mat, std::uint64_t seed);

struct GridSpec {
  std::size_t nx = 16;
  std::size_t ny = 16;
  std::size_t nz = 12;
  double lx = 0.9e-3;
  double ly = 0.4e-3;
  double lz = 0.3e-3;

  double dx() const { return lx / static_cast<double>(nx); }
  double dy() const { return ly / static_cast<double>(ny); }
  double dz() const { return lz / static_cast<double>(nz); }
  std::size_t cells() const { return nx * ny * nz; }
};

/// Synthetic free-surface model. Depression depth is
/// depth_max * (s(a (H* - H_c)) - s(-a H_c)) / (1 - s(-a H_c)), so it is 0 at H* = 0.
struct SurfaceModel {
  double surface_fraction = 0.8;  // flat surface height / lz
  double source_fraction = 0.65;  // source x / lx
  double depth_max = 0.15e-3;     // m
  double sharpness = 0.5;         // a
  double h_crit = 10.0;           // H*_c
  double radius = 100e-6;         // Gaussian depression radius, m
  double interface_width = 10e-6;  // logistic width of the metal/gas interface, m

  double depth(double h_star) const;
};

struct FieldSample {
  ProcessPoint point;
  GridSpec grid;
  std::vector<double> temperature;  // K, x-major then y then z
  std::vector<double> alpha;        // [0, 1]
};

FieldSample generate_fields(const ProcessPoint& point, const GridSpec& grid,
                            const MaterialConstants& mat, const SurfaceModel& surface = {});

/// g = (tanh(k (alpha - 0.5)) + 1) / 2.
double mask_weight(double alpha, double k = 20.0);
/// Piecewise-linear melt fraction between solidus and liquidus.
double liquid_fraction(double temperature, const MaterialConstants& mat);

struct MaskedFields {
  std::vector<double> t_tilde;
  std::vector<double> liquid_fraction;
  std::vector<double> g;
};

/// T~ = T_boil + g (T - T_boil), f_l masked by g. Works in any temperature
/// unit as long as `t_boil`, solidus and liquidus in `mat` share it.
MaskedFields mask_fields(std::span<const double> temperature, std::span<const double> alpha_ref,
                         const MaterialConstants& mat, double k = 20.0);

/// Material constants with every temperature divided by t_ref.
MaterialConstants normalized_temperatures(const MaterialConstants& mat);

/// (1, C_in, X, Y, Z) model input: coordinates in [0, 1] and the process
/// parameters at reference scales P/10, V/0.1, H*/7.5.
RealTensor make_input(const ProcessPoint& point, const GridSpec& grid,
                      const model::InputFeatures& features);

// On-disk dataset: one binary file per sample (text manifest, then
// little-endian f32 T/T_ref and alpha) plus index.json with the splits.
struct DatasetIndex {
  GridSpec grid;
  std::uint64_t seed = 0;
  std::uint64_t material_hash = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

void write_sample(const std::filesystem::path& path, const FieldSample& sample,
                  const MaterialConstants& mat);
/// Fields come back in Kelvin at f32 precision.
FieldSample read_sample(const std::filesystem::path& path, const MaterialConstants& mat);

struct GenerateOptions {
  std::size_t n_points = 40;
  double val_fraction = 0.15;
  double test_fraction = 0.15;
  WindowSpec window;
  GridSpec grid;
  SurfaceModel surface;
  std::uint64_t seed = 0;
};

/// Samples, generates and writes a full dataset; returns its index.
DatasetIndex generate_dataset(const std::filesystem::path& dir, const GenerateOptions& options,
                              const MaterialConstants& mat);
void write_index(const std::filesystem::path& dir, const DatasetIndex& index);
DatasetIndex read_index(const std::filesystem::path& dir);
std::vector<FieldSample> load_split(const std::filesystem::path& dir,
                                    const std::vector<std::string>& files,
                                    const MaterialConstants& mat);

}  // namespace hqfno::synthdata
