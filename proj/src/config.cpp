#include "hqfno/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace hqfno::config {
namespace {

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string hex64(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

json to_json(const model::ModelConfig& c) {
  return {{"layers", c.layers},
          {"width", c.width},
          {"modes", {c.modes.x, c.modes.y, c.modes.z}},
          {"c_q", c.c_q},
          {"n_qubits", c.n_qubits},
          {"depth", c.depth},
          {"padding", c.padding},
          {"mixer", model::to_string(c.mixer)},
          {"inputs",
           {{"x", c.inputs.x},
            {"y", c.inputs.y},
            {"z", c.inputs.z},
            {"power", c.inputs.power},
            {"speed", c.inputs.speed},
            {"h_star", c.inputs.h_star}}},
          {"decoder_width", c.decoder_width},
          {"bottleneck_width", c.bottleneck_width},
          {"bottleneck_depth", c.bottleneck_depth}};
}

model::ModelConfig model_config_from_json(const json& j) {
  model::ModelConfig c;
  c.layers = get<int>(j, "layers");
  c.width = get<int>(j, "width");
  const auto m = get<std::vector<int>>(j, "modes");
  if (m.size() != 3) throw ConfigError("modes must have three entries");
  c.modes = {m[0], m[1], m[2]};
  c.c_q = get<int>(j, "c_q");
  c.n_qubits = get<int>(j, "n_qubits");
  c.depth = get<int>(j, "depth");
  c.padding = get<int>(j, "padding");
  c.mixer = model::mixer_kind_from_string(get<std::string>(j, "mixer"));
  const auto& in = j.at("inputs");
  c.inputs.x = get<bool>(in, "x");
  c.inputs.y = get<bool>(in, "y");
  c.inputs.z = get<bool>(in, "z");
  c.inputs.power = get<bool>(in, "power");
  c.inputs.speed = get<bool>(in, "speed");
  c.inputs.h_star = get<bool>(in, "h_star");
  c.decoder_width = get<int>(j, "decoder_width");
  c.bottleneck_width = get<int>(j, "bottleneck_width");
  c.bottleneck_depth = get<int>(j, "bottleneck_depth");
  return c;
}

json to_json(const train::TrainConfig& c) {
  return {{"steps", c.steps},
          {"lr0", c.lr0},
          {"schedule", train::to_string(c.schedule)},
          {"t_max", c.t_max},
          {"eta_min", c.eta_min},
          {"decay_rate", c.decay_rate},
          {"decay_every", c.decay_every},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"weight_decay", c.weight_decay},
          {"grad_clip", c.grad_clip},
          {"batch_train", c.batch_train},
          {"batch_val", c.batch_val},
          {"val_every", c.val_every},
          {"relobralo",
           {{"alpha", c.relobralo.alpha},
            {"beta", c.relobralo.beta},
            {"tau", c.relobralo.tau},
            {"epsilon", c.relobralo.epsilon},
            {"fixed_weights", c.relobralo.fixed_weights}}},
          {"folds", c.folds},
          {"seed", c.seed}};
}

train::TrainConfig train_config_from_json(const json& j) {
  train::TrainConfig c;
  c.steps = get<int>(j, "steps");
  c.lr0 = get<double>(j, "lr0");
  c.schedule = train::schedule_from_string(get<std::string>(j, "schedule"));
  c.t_max = get<int>(j, "t_max");
  c.eta_min = get<double>(j, "eta_min");
  c.decay_rate = get<double>(j, "decay_rate");
  c.decay_every = get<int>(j, "decay_every");
  c.beta1 = get<double>(j, "beta1");
  c.beta2 = get<double>(j, "beta2");
  c.weight_decay = get<double>(j, "weight_decay");
  c.grad_clip = get<double>(j, "grad_clip");
  c.batch_train = get<int>(j, "batch_train");
  c.batch_val = get<int>(j, "batch_val");
  c.val_every = get<int>(j, "val_every");
  const auto& r = j.at("relobralo");
  c.relobralo.alpha = get<double>(r, "alpha");
  c.relobralo.beta = get<double>(r, "beta");
  c.relobralo.tau = get<double>(r, "tau");
  c.relobralo.epsilon = get<double>(r, "epsilon");
  c.relobralo.fixed_weights = get<bool>(r, "fixed_weights");
  c.folds = get<int>(j, "folds");
  c.seed = get<std::uint64_t>(j, "seed");
  return c;
}

json to_json(const synthdata::MaterialConstants& m) {
  return {{"absorptivity", m.absorptivity}, {"density", m.density},
          {"heat_capacity", m.heat_capacity}, {"melt_delta", m.melt_delta},
          {"diffusivity", m.diffusivity},   {"beam_sigma", m.beam_sigma},
          {"latent_heat", m.latent_heat},   {"t_boil", m.t_boil},
          {"t_solidus", m.t_solidus},       {"t_liquidus", m.t_liquidus},
          {"t_ref", m.t_ref},               {"t_ambient", m.t_ambient}};
}

synthdata::MaterialConstants material_from_json(const json& j) {
  synthdata::MaterialConstants m;
  m.absorptivity = get<double>(j, "absorptivity");
  m.density = get<double>(j, "density");
  m.heat_capacity = get<double>(j, "heat_capacity");
  m.melt_delta = get<double>(j, "melt_delta");
  m.diffusivity = get<double>(j, "diffusivity");
  m.beam_sigma = get<double>(j, "beam_sigma");
  m.latent_heat = get<double>(j, "latent_heat");
  m.t_boil = get<double>(j, "t_boil");
  m.t_solidus = get<double>(j, "t_solidus");
  m.t_liquidus = get<double>(j, "t_liquidus");
  m.t_ref = get<double>(j, "t_ref");
  m.t_ambient = get<double>(j, "t_ambient");
  return m;
}

json to_json(const synthdata::GenerateOptions& o) {
  const auto& w = o.window;
  const auto& g = o.grid;
  const auto& s = o.surface;
  return {{"n_points", o.n_points},
          {"val_fraction", o.val_fraction},
          {"test_fraction", o.test_fraction},
          {"seed", o.seed},
          {"window",
           {{"h_min", w.h_min},
            {"h_max", w.h_max},
            {"p_min", w.p_min},
            {"p_max", w.p_max},
            {"v_min", w.v_min},
            {"v_max", w.v_max},
            {"mode", w.mode == synthdata::SamplingMode::Grid ? "grid" : "lhs"}}},
          {"grid",
           {{"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}, {"lx", g.lx}, {"ly", g.ly}, {"lz", g.lz}}},
          {"surface",
           {{"surface_fraction", s.surface_fraction},
            {"source_fraction", s.source_fraction},
            {"depth_max", s.depth_max},
            {"sharpness", s.sharpness},
            {"h_crit", s.h_crit},
            {"radius", s.radius},
            {"interface_width", s.interface_width}}}};
}

synthdata::GenerateOptions generate_options_from_json(const json& j) {
  synthdata::GenerateOptions o;
  o.n_points = get<std::size_t>(j, "n_points");
  o.val_fraction = get<double>(j, "val_fraction");
  o.test_fraction = get<double>(j, "test_fraction");
  o.seed = get<std::uint64_t>(j, "seed");
  const auto& w = j.at("window");
  o.window.h_min = get<double>(w, "h_min");
  o.window.h_max = get<double>(w, "h_max");
  o.window.p_min = get<double>(w, "p_min");
  o.window.p_max = get<double>(w, "p_max");
  o.window.v_min = get<double>(w, "v_min");
  o.window.v_max = get<double>(w, "v_max");
  const auto mode = get<std::string>(w, "mode");
  if (mode == "grid") o.window.mode = synthdata::SamplingMode::Grid;
  else if (mode == "lhs") o.window.mode = synthdata::SamplingMode::LatinHypercube;
  else throw ConfigError("window.mode must be 'grid' or 'lhs'");
  const auto& g = j.at("grid");
  o.grid.nx = get<std::size_t>(g, "nx");
  o.grid.ny = get<std::size_t>(g, "ny");
  o.grid.nz = get<std::size_t>(g, "nz");
  o.grid.lx = get<double>(g, "lx");
  o.grid.ly = get<double>(g, "ly");
  o.grid.lz = get<double>(g, "lz");
  const auto& s = j.at("surface");
  o.surface.surface_fraction = get<double>(s, "surface_fraction");
  o.surface.source_fraction = get<double>(s, "source_fraction");
  o.surface.depth_max = get<double>(s, "depth_max");
  o.surface.sharpness = get<double>(s, "sharpness");
  o.surface.h_crit = get<double>(s, "h_crit");
  o.surface.radius = get<double>(s, "radius");
  o.surface.interface_width = get<double>(s, "interface_width");
  return o;
}

json to_json(const RunConfig& c) {
  return {{"schema_version", kSchemaVersion}, {"model", to_json(c.model)},
          {"train", to_json(c.train)},        {"material", to_json(c.material)},
          {"data", to_json(c.data)},          {"dataset_dir", c.dataset_dir},
          {"output_dir", c.output_dir},       {"noise_profile", c.noise_profile}};
}

json overlay_strict(const json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError("expected an object at '" + where + "'");
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (defaults[key].is_object()) {
      out[key] = overlay_strict(defaults[key], value, path);
    } else {
      out[key] = value;
    }
  }
  return out;
}

RunConfig parse_run_config(const json& user) {
  if (user.contains("schema_version") && user["schema_version"] != kSchemaVersion) {
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) +
                      ")");
  }
  const json merged = overlay_strict(to_json(RunConfig{}), user);
  RunConfig c;
  c.model = model_config_from_json(merged.at("model"));
  c.train = train_config_from_json(merged.at("train"));
  c.material = material_from_json(merged.at("material"));
  c.data = generate_options_from_json(merged.at("data"));
  c.dataset_dir = get<std::string>(merged, "dataset_dir");
  c.output_dir = get<std::string>(merged, "output_dir");
  c.noise_profile = get<std::string>(merged, "noise_profile");
  c.model.validate();
  c.train.validate();
  c.material.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return parse_run_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::string text_hash(const std::string& text) { return hex64(fnv1a(text)); }

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return text_hash(s.str());
}

}  // namespace hqfno::config
