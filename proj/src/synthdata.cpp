#include "hqfno/synthdata.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "hqfno/layers.hpp"
#include "json.hpp"

namespace hqfno::synthdata {
namespace {

using json = nlohmann::json;
constexpr const char* kSampleMagic = "HQFNO-SAMPLE 1";

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_f32(std::ostream& out, const std::vector<double>& values, double scale) {
  std::vector<float> buf(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) buf[i] = static_cast<float>(values[i] * scale);
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& f : buf) {
      auto u = std::bit_cast<std::uint32_t>(f);
      u = __builtin_bswap32(u);
      f = std::bit_cast<float>(u);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

std::vector<double> read_f32(std::istream& in, std::size_t n, double scale,
                             const std::string& what) {
  std::vector<float> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(float)) {
    throw DataError("truncated " + what + " array");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    float f = buf[i];
    if constexpr (std::endian::native == std::endian::big) {
      f = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(f)));
    }
    out[i] = static_cast<double>(f) * scale;
  }
  return out;
}

json grid_to_json(const GridSpec& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}, {"lx", g.lx}, {"ly", g.ly}, {"lz", g.lz}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.nx = j.at("nx").get<std::size_t>();
  g.ny = j.at("ny").get<std::size_t>();
  g.nz = j.at("nz").get<std::size_t>();
  g.lx = j.at("lx").get<double>();
  g.ly = j.at("ly").get<double>();
  g.lz = j.at("lz").get<double>();
  return g;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

void MaterialConstants::validate() const {
  const double positive[] = {absorptivity, density, heat_capacity, melt_delta, diffusivity,
                             beam_sigma, t_boil, t_ref, t_ambient};
  for (double v : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("material constants must be positive");
  }
  if (!(t_solidus < t_liquidus && t_liquidus < t_boil)) {
    throw ConfigError("need T_solidus < T_liquidus < T_boil");
  }
}

std::uint64_t MaterialConstants::hash() const {
  const double v[] = {absorptivity, density,  heat_capacity, melt_delta, diffusivity,
                      beam_sigma,   latent_heat, t_boil,     t_solidus,  t_liquidus,
                      t_ref,        t_ambient};
  return fnv1a(v, sizeof(v));
}

double h_star(double power, double speed, const MaterialConstants& mat) {
  if (!(speed > 0.0)) throw DomainError("scan speed must be positive");
  const double denom = mat.density * mat.heat_capacity * mat.melt_delta *
                       std::sqrt(std::numbers::pi * mat.diffusivity *
                                 std::pow(mat.beam_sigma, 3) * speed);
  return mat.absorptivity * power / denom;
}

double speed_for(double h, double power, const MaterialConstants& mat) {
  if (!(h > 0.0) || !(power > 0.0)) throw DomainError("H* and P must be positive");
  const double a = mat.absorptivity * power / (mat.density * mat.heat_capacity * mat.melt_delta * h);
  return a * a / (std::numbers::pi * mat.diffusivity * std::pow(mat.beam_sigma, 3));
}

SamplingResult sample_window(std::size_t n, const WindowSpec& w, const MaterialConstants& mat,
                             std::uint64_t seed) {
  if (n == 0) throw SamplingError("requested zero points");
  if (!(w.h_min > 0.0 && w.h_max >= w.h_min && w.p_min > 0.0 && w.p_max >= w.p_min)) {
    throw ConfigError("window ranges must be positive and ordered");
  }
  std::vector<std::pair<double, double>> unit;  // (h, p) in [0, 1)^2
  if (w.mode == SamplingMode::Grid) {
    const auto nh = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const std::size_t np = (n + nh - 1) / nh;
    for (std::size_t i = 0; i < nh && unit.size() < n; ++i) {
      for (std::size_t j = 0; j < np && unit.size() < n; ++j) {
        unit.emplace_back((i + 0.5) / static_cast<double>(nh), (j + 0.5) / static_cast<double>(np));
      }
    }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::size_t> ph(n), pp(n);
    std::iota(ph.begin(), ph.end(), 0);
    std::iota(pp.begin(), pp.end(), 0);
    std::shuffle(ph.begin(), ph.end(), rng);
    std::shuffle(pp.begin(), pp.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = (static_cast<double>(ph[i]) + u(rng)) / static_cast<double>(n);
      const double b = (static_cast<double>(pp[i]) + u(rng)) / static_cast<double>(n);
      unit.emplace_back(a, b);
    }
  }
  SamplingResult r;
  for (const auto& [a, b] : unit) {
    ProcessPoint p;
    p.h_star = w.h_min + a * (w.h_max - w.h_min);
    p.power = w.p_min + b * (w.p_max - w.p_min);
    p.speed = speed_for(p.h_star, p.power, mat);
    if (p.speed < w.v_min || p.speed > w.v_max) {
      ++r.rejected;
      continue;
    }
    r.points.push_back(p);
  }
  if (r.points.empty()) throw SamplingError("no candidate point has V_scan inside the bounds");
  return r;
}

double SurfaceModel::depth(double h) const {
  const double s0 = sigmoid(-sharpness * h_crit);
  return depth_max * (sigmoid(sharpness * (h - h_crit)) - s0) / (1.0 - s0);
}

FieldSample generate_fields(const ProcessPoint& point, const GridSpec& grid,
                            const MaterialConstants& mat, const SurfaceModel& surface) {
  if (grid.nx < 2 || grid.ny < 2 || grid.nz < 2) throw ShapeError("grid needs >= 2 cells per axis");
  if (point.power < 0.0 || !(point.speed > 0.0)) throw DomainError("invalid process point");
  FieldSample s;
  s.point = point;
  s.grid = grid;
  s.temperature.resize(grid.cells());
  s.alpha.resize(grid.cells());

  const double k = mat.conductivity();
  const double amp = mat.absorptivity * point.power / (2.0 * std::numbers::pi * k);
  const double floor_r = 0.5 * std::min({grid.dx(), grid.dy(), grid.dz()});
  const double xs = surface.source_fraction * grid.lx;
  const double yc = 0.5 * grid.ly;
  const double z_flat = surface.surface_fraction * grid.lz;
  const double depth = surface.depth(point.h_star);
  const double zs = z_flat - depth;
  const double r2 = 2.0 * surface.radius * surface.radius;

  std::size_t idx = 0;
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * grid.dx();
    const double xi = x - xs;
    for (std::size_t j = 0; j < grid.ny; ++j) {
      const double y = (static_cast<double>(j) + 0.5) * grid.dy();
      const double dy = y - yc;
      const double z_surf = z_flat - depth * std::exp(-(xi * xi + dy * dy) / r2);
      for (std::size_t l = 0; l < grid.nz; ++l, ++idx) {
        const double z = (static_cast<double>(l) + 0.5) * grid.dz();
        const double dz = z - zs;
        const double r = std::max(std::sqrt(xi * xi + dy * dy + dz * dz), floor_r);
        const double t = mat.t_ambient +
                         amp / r * std::exp(-point.speed * (r + xi) / (2.0 * mat.diffusivity));
        s.temperature[idx] = std::min(t, mat.t_boil);
        s.alpha[idx] = sigmoid((z_surf - z) / surface.interface_width);
      }
    }
  }
  return s;
}

double mask_weight(double alpha, double k) { return 0.5 * (std::tanh(k * (alpha - 0.5)) + 1.0); }

double liquid_fraction(double t, const MaterialConstants& mat) {
  if (t <= mat.t_solidus) return 0.0;
  if (t >= mat.t_liquidus) return 1.0;
  return (t - mat.t_solidus) / (mat.t_liquidus - mat.t_solidus);
}

MaskedFields mask_fields(std::span<const double> temperature, std::span<const double> alpha_ref,
                         const MaterialConstants& mat, double k) {
  if (temperature.size() != alpha_ref.size()) throw ShapeError("T and alpha sizes differ");
  MaskedFields m;
  m.t_tilde.resize(temperature.size());
  m.liquid_fraction.resize(temperature.size());
  m.g.resize(temperature.size());
  for (std::size_t i = 0; i < temperature.size(); ++i) {
    const double g = mask_weight(alpha_ref[i], k);
    m.g[i] = g;
    m.t_tilde[i] = mat.t_boil + g * (temperature[i] - mat.t_boil);
    m.liquid_fraction[i] = g * liquid_fraction(temperature[i], mat);
  }
  return m;
}

MaterialConstants normalized_temperatures(const MaterialConstants& mat) {
  MaterialConstants n = mat;
  n.t_boil /= mat.t_ref;
  n.t_solidus /= mat.t_ref;
  n.t_liquidus /= mat.t_ref;
  n.t_ambient /= mat.t_ref;
  n.melt_delta /= mat.t_ref;
  n.t_ref = 1.0;
  return n;
}

RealTensor make_input(const ProcessPoint& point, const GridSpec& grid,
                      const model::InputFeatures& f) {
  const std::size_t c = static_cast<std::size_t>(f.count());
  RealTensor t({1, c, grid.nx, grid.ny, grid.nz});
  const std::size_t n = grid.cells();
  std::size_t ch = 0;
  auto coord = [&](int axis) {
    double* d = t.data() + ch * n;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < grid.nx; ++i) {
      for (std::size_t j = 0; j < grid.ny; ++j) {
        for (std::size_t l = 0; l < grid.nz; ++l, ++idx) {
          const std::size_t v = axis == 0 ? i : axis == 1 ? j : l;
          const std::size_t len = axis == 0 ? grid.nx : axis == 1 ? grid.ny : grid.nz;
          d[idx] = static_cast<double>(v) / static_cast<double>(len - 1);
        }
      }
    }
    ++ch;
  };
  auto constant = [&](double v) {
    std::fill_n(t.data() + ch * n, n, v);
    ++ch;
  };
  if (f.x) coord(0);
  if (f.y) coord(1);
  if (f.z) coord(2);
  if (f.power) constant(point.power / 10.0);
  if (f.speed) constant(point.speed / 0.1);
  if (f.h_star) constant(point.h_star / 7.5);
  return t;
}

void write_sample(const std::filesystem::path& path, const FieldSample& s,
                  const MaterialConstants& mat) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << kSampleMagic << "\n" << std::setprecision(17);
  out << "power " << s.point.power << "\n";
  out << "speed " << s.point.speed << "\n";
  out << "h_star " << s.point.h_star << "\n";
  out << "grid " << s.grid.nx << " " << s.grid.ny << " " << s.grid.nz << " " << s.grid.lx << " "
      << s.grid.ly << " " << s.grid.lz << "\n";
  out << "material " << hex64(mat.hash()) << "\n";
  out << "t_ref " << mat.t_ref << "\n";
  out << "data f32le T/t_ref alpha\n";
  write_f32(out, s.temperature, 1.0 / mat.t_ref);
  write_f32(out, s.alpha, 1.0);
  if (!out) throw DataError("failed writing " + path.string());
}

FieldSample read_sample(const std::filesystem::path& path, const MaterialConstants& mat) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kSampleMagic) throw DataError(path.string() + " is not a sample file");
  FieldSample s;
  double t_ref = mat.t_ref;
  bool has_grid = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "data") break;
    if (key == "power") ls >> s.point.power;
    else if (key == "speed") ls >> s.point.speed;
    else if (key == "h_star") ls >> s.point.h_star;
    else if (key == "grid") {
      ls >> s.grid.nx >> s.grid.ny >> s.grid.nz >> s.grid.lx >> s.grid.ly >> s.grid.lz;
      has_grid = true;
    } else if (key == "material") {
      std::string h;
      ls >> h;
      if (h != hex64(mat.hash())) throw DataError(path.string() + " uses other material constants");
    } else if (key == "t_ref") {
      ls >> t_ref;
    } else {
      throw DataError("unknown manifest key '" + key + "' in " + path.string());
    }
    if (ls.fail()) throw DataError("malformed manifest line '" + line + "'");
  }
  if (!has_grid) throw DataError(path.string() + " has no grid line");
  s.temperature = read_f32(in, s.grid.cells(), t_ref, "temperature");
  s.alpha = read_f32(in, s.grid.cells(), 1.0, "alpha");
  return s;
}

void write_index(const std::filesystem::path& dir, const DatasetIndex& index) {
  json j = {{"schema_version", 1},
            {"grid", grid_to_json(index.grid)},
            {"seed", index.seed},
            {"material_hash", hex64(index.material_hash)},
            {"splits", {{"train", index.train}, {"val", index.val}, {"test", index.test}}}};
  std::ofstream out(dir / "index.json");
  if (!out) throw DataError("cannot write index in " + dir.string());
  out << j.dump(2) << "\n";
}

DatasetIndex read_index(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.json");
  if (!in) throw DataError("no index.json in " + dir.string());
  try {
    const json j = json::parse(in);
    if (j.at("schema_version").get<int>() != 1) throw DataError("unsupported index schema");
    DatasetIndex idx;
    idx.grid = grid_from_json(j.at("grid"));
    idx.seed = j.at("seed").get<std::uint64_t>();
    idx.material_hash = std::stoull(j.at("material_hash").get<std::string>(), nullptr, 16);
    const auto& sp = j.at("splits");
    idx.train = sp.at("train").get<std::vector<std::string>>();
    idx.val = sp.at("val").get<std::vector<std::string>>();
    idx.test = sp.at("test").get<std::vector<std::string>>();
    return idx;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed index.json: ") + e.what());
  }
}

DatasetIndex generate_dataset(const std::filesystem::path& dir, const GenerateOptions& opt,
                              const MaterialConstants& mat) {
  mat.validate();
  std::filesystem::create_directories(dir);
  const auto sampled = sample_window(opt.n_points, opt.window, mat, opt.seed);
  auto points = sampled.points;
  std::mt19937_64 rng(opt.seed ^ 0x5eedULL);
  std::shuffle(points.begin(), points.end(), rng);

  const std::size_t n = points.size();
  auto n_val = static_cast<std::size_t>(std::round(opt.val_fraction * static_cast<double>(n)));
  auto n_test = static_cast<std::size_t>(std::round(opt.test_fraction * static_cast<double>(n)));
  if (n >= 3) {
    n_val = std::max<std::size_t>(n_val, opt.val_fraction > 0 ? 1 : 0);
    n_test = std::max<std::size_t>(n_test, opt.test_fraction > 0 ? 1 : 0);
  }
  if (n_val + n_test >= n) throw SamplingError("too few feasible points for the requested splits");

  DatasetIndex idx;
  idx.grid = opt.grid;
  idx.seed = opt.seed;
  idx.material_hash = mat.hash();
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream name;
    name << "sample_" << std::setw(4) << std::setfill('0') << i << ".bin";
    write_sample(dir / name.str(), generate_fields(points[i], opt.grid, mat, opt.surface), mat);
    if (i < n_val) idx.val.push_back(name.str());
    else if (i < n_val + n_test) idx.test.push_back(name.str());
    else idx.train.push_back(name.str());
  }
  write_index(dir, idx);
  return idx;
}

std::vector<FieldSample> load_split(const std::filesystem::path& dir,
                                    const std::vector<std::string>& files,
                                    const MaterialConstants& mat) {
  std::vector<FieldSample> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_sample(dir / f, mat));
  return out;
}

}  // namespace hqfno::synthdata
