#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <fftw3.h>

#include "CLI11.hpp"
#include "hqfno/config.hpp"
#include "hqfno/diag.hpp"
#include "hqfno/errors.hpp"
#include "hqfno/metrics.hpp"
#include "hqfno/mixer.hpp"
#include "hqfno/model.hpp"
#include "hqfno/noise.hpp"
#include "hqfno/plot.hpp"
#include "hqfno/synthdata.hpp"
#include "hqfno/train.hpp"

namespace fs = std::filesystem;
using namespace hqfno;
using config::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

struct Common {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
};

struct ModelFlags {
  std::optional<int> c_q, width, layers, depth, padding, decoder_width;
  std::optional<std::string> mixer;
  std::vector<int> modes;
};

struct TrainFlags {
  std::optional<int> steps, folds, batch_train, val_every;
  std::optional<double> lr0;
  std::optional<std::string> schedule;
};

void apply(const ModelFlags& f, model::ModelConfig& m) {
  if (f.c_q) m.c_q = *f.c_q;
  if (f.width) m.width = *f.width;
  if (f.layers) m.layers = *f.layers;
  if (f.depth) m.depth = *f.depth;
  if (f.padding) m.padding = *f.padding;
  if (f.decoder_width) m.decoder_width = *f.decoder_width;
  if (f.mixer) m.mixer = model::mixer_kind_from_string(*f.mixer);
  if (!f.modes.empty()) {
    if (f.modes.size() != 3) throw ConfigError("--modes takes three values");
    m.modes = {f.modes[0], f.modes[1], f.modes[2]};
  }
}

void apply(const TrainFlags& f, train::TrainConfig& t) {
  if (f.steps) t.steps = *f.steps;
  if (f.folds) t.folds = *f.folds;
  if (f.batch_train) t.batch_train = *f.batch_train;
  if (f.val_every) t.val_every = *f.val_every;
  if (f.lr0) t.lr0 = *f.lr0;
  if (f.schedule) t.schedule = train::schedule_from_string(*f.schedule);
}

void add_model_flags(CLI::App* app, ModelFlags& f) {
  app->add_option("--c-q", f.c_q, "quantum channels C_q");
  app->add_option("--width", f.width, "channel width C");
  app->add_option("--layers", f.layers, "Fourier layers");
  app->add_option("--depth", f.depth, "mixer circuit depth");
  app->add_option("--padding", f.padding, "zero padding per axis");
  app->add_option("--decoder-width", f.decoder_width, "decoder hidden width");
  app->add_option("--mixer", f.mixer, "none | vqc | bottleneck");
  app->add_option("--modes", f.modes, "retained modes mx my mz")->expected(3);
}

void add_train_flags(CLI::App* app, TrainFlags& f) {
  app->add_option("--steps", f.steps, "optimizer steps");
  app->add_option("--folds", f.folds, "number of folds");
  app->add_option("--batch", f.batch_train, "training batch size");
  app->add_option("--val-every", f.val_every, "validation interval");
  app->add_option("--lr0", f.lr0, "initial learning rate");
  app->add_option("--schedule", f.schedule, "cosine | exp_decay");
}

struct Loaded {
  config::RunConfig cfg;
  std::string file_hash;  // empty without a config file
};

Loaded load_config(const Common& c) {
  Loaded l;
  if (c.config_path.empty()) {
    l.cfg = config::parse_run_config(json::object());
  } else {
    if (!fs::exists(c.config_path)) throw ConfigError("config file not found: " + c.config_path);
    l.cfg = config::load_run_config(c.config_path);
    l.file_hash = config::file_hash(c.config_path);
  }
  if (const char* root = std::getenv("HQFNO_OUTPUT_ROOT"); root && *root) {
    l.cfg.output_dir = root;
  }
  if (c.seed) {
    l.cfg.train.seed = *c.seed;
    l.cfg.data.seed = *c.seed;
  }
  return l;
}

fs::path out_dir(const Common& c, const config::RunConfig& cfg, const std::string& sub) {
  fs::path p = c.out.empty() ? fs::path(cfg.output_dir) / sub : fs::path(c.out);
  fs::create_directories(p);
  return p;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

class Manifest {
 public:
  Manifest(std::string command, const Loaded& l, const Common& c)
      : start_(std::chrono::steady_clock::now()) {
    j_["command"] = std::move(command);
    j_["config"] = config::to_json(l.cfg);
    j_["config_hash"] = config::text_hash(j_["config"].dump());
    if (!l.file_hash.empty()) {
      j_["config_file"] = c.config_path;
      j_["config_file_hash"] = l.file_hash;
    }
    j_["seed"] = l.cfg.train.seed;
    j_["deterministic"] = c.deterministic;
    j_["versions"] = {{"hqfno", kVersion},
                      {"fftw", std::string(fftw_version)},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)},
                      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                      {"compiler", std::string(__VERSION__)}};
    j_["timings"]["started"] = utc_now();
    j_["artifacts"] = json::array();
  }

  json& operator[](const std::string& key) { return j_[key]; }
  void artifact(const fs::path& p) { j_["artifacts"].push_back(p.filename().string()); }
  void phase(const std::string& name, double seconds) { j_["timings"]["phases"][name] = seconds; }

  void write(const fs::path& dir) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    j_["timings"]["finished"] = utc_now();
    j_["timings"]["wall_seconds"] = dt.count();
    std::ofstream(dir / "manifest.json") << j_.dump(2) << "\n";
  }

 private:
  json j_;
  std::chrono::steady_clock::time_point start_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Splits {
  std::vector<synthdata::FieldSample> train, val, test;
};

Splits load_fold(const fs::path& dir, const synthdata::MaterialConstants& mat, int fold,
                 std::uint64_t seed) {
  if (!fs::exists(dir / "index.json")) throw DataError("no dataset index in " + dir.string());
  const auto idx = synthdata::read_index(dir);
  if (fold == 0) {
    return {synthdata::load_split(dir, idx.train, mat), synthdata::load_split(dir, idx.val, mat),
            synthdata::load_split(dir, idx.test, mat)};
  }
  std::vector<std::string> all = idx.train;
  all.insert(all.end(), idx.val.begin(), idx.val.end());
  all.insert(all.end(), idx.test.begin(), idx.test.end());
  std::sort(all.begin(), all.end());
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(fold));
  std::shuffle(all.begin(), all.end(), rng);
  const auto a = all.begin();
  const auto b = a + static_cast<std::ptrdiff_t>(idx.train.size());
  const auto c = b + static_cast<std::ptrdiff_t>(idx.val.size());
  return {synthdata::load_split(dir, {a, b}, mat), synthdata::load_split(dir, {b, c}, mat),
          synthdata::load_split(dir, {c, all.end()}, mat)};
}

void write_metrics(const fs::path& path, const std::string& model, int fold,
                   const std::vector<metrics::MetricReport>& r, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  metrics::write_report_csv(out, model, fold, r, !append);
}

void print_reports(const std::vector<metrics::MetricReport>& reports) {
  for (const auto& r : reports) {
    std::cout << "  " << std::left << std::setw(8) << r.field_name << " RelMAE "
              << std::setprecision(6) << r.rel_mae << "  RelRMSE " << r.rel_rmse;
    if (r.iou_mean) std::cout << "  IoU " << *r.iou_mean;
    std::cout << "\n";
  }
}

// gen-data

struct GenFlags {
  std::optional<std::size_t> n_points;
  std::vector<std::size_t> grid;
  std::optional<std::string> sampling;
  std::optional<double> h_min, h_max;
};

int cmd_gen_data(const Common& c, const GenFlags& f) {
  auto l = load_config(c);
  auto& o = l.cfg.data;
  if (f.n_points) o.n_points = *f.n_points;
  if (!f.grid.empty()) {
    o.grid.nx = f.grid[0];
    o.grid.ny = f.grid[1];
    o.grid.nz = f.grid[2];
  }
  if (f.sampling) {
    if (*f.sampling == "grid") o.window.mode = synthdata::SamplingMode::Grid;
    else if (*f.sampling == "lhs") o.window.mode = synthdata::SamplingMode::LatinHypercube;
    else throw ConfigError("--sampling must be grid or lhs");
  }
  if (f.h_min) o.window.h_min = *f.h_min;
  if (f.h_max) o.window.h_max = *f.h_max;
  const fs::path dir = c.out.empty() ? fs::path(l.cfg.dataset_dir) : fs::path(c.out);
  l.cfg.dataset_dir = dir.string();
  Manifest m("gen-data", l, c);
  const auto t0 = std::chrono::steady_clock::now();
  const auto idx = synthdata::generate_dataset(dir, o, l.cfg.material);
  m.phase("generate", seconds_since(t0));
  m["seed"] = o.seed;
  m["splits"] = {{"train", idx.train.size()}, {"val", idx.val.size()}, {"test", idx.test.size()}};
  m.artifact(dir / "index.json");
  m.write(dir);
  std::cout << "wrote " << idx.train.size() << "/" << idx.val.size() << "/" << idx.test.size()
            << " train/val/test samples to " << dir << "\n";
  return kOk;
}

// train

struct DataFlag {
  std::string data;
};

fs::path dataset(const DataFlag& d, const config::RunConfig& cfg) {
  return d.data.empty() ? fs::path(cfg.dataset_dir) : fs::path(d.data);
}

int cmd_train(const Common& c, const ModelFlags& mf, const TrainFlags& tf, const DataFlag& df) {
  auto l = load_config(c);
  apply(mf, l.cfg.model);
  apply(tf, l.cfg.train);
  l.cfg.model.validate();
  l.cfg.train.validate();
  const auto dir = out_dir(c, l.cfg, "train");
  const auto data_dir = dataset(df, l.cfg);
  l.cfg.dataset_dir = data_dir.string();
  Manifest m("train", l, c);
  const auto counts = model::count_params(l.cfg.model);
  m["params"] = counts.total;
  const auto metrics_path = dir / "metrics.csv";
  for (int k = 0; k < l.cfg.train.folds; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto split = load_fold(data_dir, l.cfg.material, k, l.cfg.train.seed);
    auto tc = l.cfg.train;
    tc.seed = l.cfg.train.seed + static_cast<std::uint64_t>(k);
    const fs::path fold_dir = l.cfg.train.folds == 1 ? dir : dir / ("fold" + std::to_string(k));
    const auto res = train::train_run(l.cfg.model, tc, split.train, split.val, l.cfg.material, fold_dir);
    const auto reps = train::evaluate(res.best_params, split.test.empty() ? split.val : split.test,
                                      l.cfg.material, tc.batch_val);
    write_metrics(metrics_path, model::to_string(l.cfg.model.mixer), k, reps, k > 0);
    m.phase("fold" + std::to_string(k), seconds_since(t0));
    m["folds"].push_back({{"fold", k},
                          {"seed", tc.seed},
                          {"best_step", res.best_step},
                          {"best_val_rel_mae", res.best_val_rel_mae}});
    std::cout << "fold " << k << ": best val RelMAE " << res.best_val_rel_mae << " at step "
              << res.best_step << "\n";
    print_reports(reps);
  }
  if (l.cfg.train.folds == 1) {
    for (const char* a : {"final.ckpt", "best.ckpt", "log.csv"}) m.artifact(dir / a);
  }
  m.artifact(metrics_path);
  m.write(dir);
  return kOk;
}

// eval

struct EvalFlags {
  std::string checkpoint;
  std::string split = "test";
  int fold = 0;
};

int cmd_eval(const Common& c, const EvalFlags& ef, const DataFlag& df) {
  auto l = load_config(c);
  if (!fs::exists(ef.checkpoint)) throw DataError("checkpoint not found: " + ef.checkpoint);
  const auto params = model::load_checkpoint_file(ef.checkpoint);
  l.cfg.model = params.config;
  const auto dir = out_dir(c, l.cfg, "eval");
  const auto data_dir = dataset(df, l.cfg);
  l.cfg.dataset_dir = data_dir.string();
  Manifest m("eval", l, c);
  m["checkpoint"] = ef.checkpoint;
  m["checkpoint_hash"] = config::file_hash(ef.checkpoint);
  m["split"] = ef.split;
  const auto split = load_fold(data_dir, l.cfg.material, ef.fold, l.cfg.train.seed);
  const std::vector<synthdata::FieldSample>* set = nullptr;
  if (ef.split == "train") set = &split.train;
  else if (ef.split == "val") set = &split.val;
  else if (ef.split == "test") set = &split.test;
  else throw ConfigError("--split must be train, val or test");
  if (set->empty()) throw DataError("split '" + ef.split + "' is empty");
  const auto t0 = std::chrono::steady_clock::now();
  const auto reps = train::evaluate(params, *set, l.cfg.material, l.cfg.train.batch_val);
  m.phase("evaluate", seconds_since(t0));
  write_metrics(dir / "metrics.csv", model::to_string(params.config.mixer), ef.fold, reps, false);
  m.artifact(dir / "metrics.csv");
  m.write(dir);
  std::cout << std::setprecision(10) << "rel_mae_t " << reps.front().rel_mae << "\n";
  print_reports(reps);
  return kOk;
}

// sweep-cq

// Fills in the mixer kind per C_q unless --mixer was given explicitly.
model::ModelConfig with_cq(model::ModelConfig m, int cq, const ModelFlags& f) {
  m.c_q = cq;
  m.n_qubits = 0;
  if (f.mixer) return m;
  if (cq == 0) m.mixer = model::MixerKind::None;
  else if (m.mixer == model::MixerKind::None) m.mixer = model::MixerKind::Vqc;
  return m;
}

const metrics::MetricReport& field(const std::vector<metrics::MetricReport>& r, const std::string& n) {
  for (const auto& x : r) {
    if (x.field_name == n) return x;
  }
  throw DataError("missing metric field " + n);
}

int cmd_sweep_cq(const Common& c, const ModelFlags& mf, const TrainFlags& tf, const DataFlag& df,
                 const std::vector<int>& values) {
  auto l = load_config(c);
  apply(mf, l.cfg.model);
  apply(tf, l.cfg.train);
  l.cfg.train.validate();
  for (int cq : values) with_cq(l.cfg.model, cq, mf).validate();
  const auto dir = out_dir(c, l.cfg, "sweep-cq");
  const auto data_dir = dataset(df, l.cfg);
  l.cfg.dataset_dir = data_dir.string();
  Manifest m("sweep-cq", l, c);
  m["c_q_values"] = values;
  std::ofstream per_fold(dir / "folds.csv");
  std::ofstream table(dir / "sweep.csv");
  table << "c_q,mixer,params,rel_mae_t_mean,rel_mae_t_std,rel_rmse_t_mean,rel_rmse_t_std,"
           "iou_fl_mean,iou_fl_std,rel_mae_t,rel_rmse_t,iou_fl\n";
  std::cout << std::left << std::setw(5) << "C_q" << std::setw(14) << "params" << std::setw(20)
            << "RelMAE(T)" << std::setw(20) << "RelRMSE(T)" << "IoU(f_l)\n";
  bool header = true;
  for (int cq : values) {
    const auto mc = with_cq(l.cfg.model, cq, mf);
    const auto params = model::count_params(mc).total;
    std::vector<double> mae, rmse, iou;
    for (int k = 0; k < l.cfg.train.folds; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto split = load_fold(data_dir, l.cfg.material, k, l.cfg.train.seed);
      auto tc = l.cfg.train;
      tc.seed = l.cfg.train.seed + static_cast<std::uint64_t>(k);
      const auto res = train::train_run(mc, tc, split.train, split.val, l.cfg.material);
      const auto reps = train::evaluate(res.best_params, split.test.empty() ? split.val : split.test,
                                        l.cfg.material, tc.batch_val);
      metrics::write_report_csv(per_fold, "c_q=" + std::to_string(cq), k, reps, header);
      header = false;
      mae.push_back(field(reps, "T_tilde").rel_mae);
      rmse.push_back(field(reps, "T_tilde").rel_rmse);
      iou.push_back(*field(reps, "f_l").iou_mean);
      m.phase("c_q" + std::to_string(cq) + "_fold" + std::to_string(k), seconds_since(t0));
    }
    const auto a = metrics::fold_stats(mae), b = metrics::fold_stats(rmse), f = metrics::fold_stats(iou);
    table << std::setprecision(10) << cq << "," << model::to_string(mc.mixer) << "," << params
          << "," << a.mean << "," << a.std << "," << b.mean << "," << b.std << "," << f.mean << ","
          << f.std << "," << metrics::format_mean_std(a) << "," << metrics::format_mean_std(b)
          << "," << metrics::format_mean_std(f) << "\n";
    std::cout << std::setw(5) << cq << std::setw(14) << params << std::setw(20)
              << metrics::format_mean_std(a) << std::setw(20) << metrics::format_mean_std(b)
              << metrics::format_mean_std(f) << "\n";
  }
  m.artifact(dir / "sweep.csv");
  m.artifact(dir / "folds.csv");
  m.write(dir);
  return kOk;
}

// params

int cmd_params(const Common& c, const ModelFlags& mf, const std::vector<int>& values) {
  auto l = load_config(c);
  apply(mf, l.cfg.model);
  for (int cq : values) with_cq(l.cfg.model, cq, mf).validate();
  const auto dir = out_dir(c, l.cfg, "params");
  Manifest m("params", l, c);
  std::ofstream csv(dir / "params.csv");
  csv << "c_q,mixer,spectral_per_layer,quantum_per_layer,spectral_branch,pointwise,lifting,"
         "decoder,total,enumerated_total,delta_vs_first\n";
  std::cout << std::left << std::setw(5) << "C_q" << std::setw(12) << "mixer" << std::setw(16)
            << "spectral" << std::setw(14) << "total" << "delta\n";
  std::int64_t first = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto mc = with_cq(l.cfg.model, values[i], mf);
    const auto b = model::count_params(mc);
    if (i == 0) first = b.total;
    csv << values[i] << "," << model::to_string(mc.mixer) << "," << b.spectral_per_layer << ","
        << b.quantum_per_layer << "," << b.spectral_branch() << "," << b.pointwise << ","
        << b.lifting << "," << b.decoder << "," << b.total << "," << b.enumerated_total << ","
        << (b.total - first) << "\n";
    std::cout << std::setw(5) << values[i] << std::setw(12) << model::to_string(mc.mixer)
              << std::setw(16) << b.spectral_branch() << std::setw(14) << b.total
              << (b.total - first) << "\n";
  }
  m.artifact(dir / "params.csv");
  m.write(dir);
  return kOk;
}

// diag-fim

struct FimFlags {
  int n_qubits = 5;
  std::vector<int> depths{1, 2, 3};
  int theta_samples = 8;
  int data_samples = 8;
  bool single_rx = false;
};

int cmd_diag_fim(const Common& c, const FimFlags& f) {
  auto l = load_config(c);
  const auto dir = out_dir(c, l.cfg, "diag-fim");
  Manifest m("diag-fim", l, c);
  const std::uint64_t seed = c.seed.value_or(0);
  m["seed"] = seed;
  std::ofstream eig(dir / "fim_eigenvalues.csv");
  std::ofstream sum(dir / "fim_summary.csv");
  eig << "depth,index,eigenvalue\n" << std::setprecision(12);
  sum << "depth,n_params,rank,mean_eigenvalue,mean_eigenvalue_stderr,max_asymmetry\n"
      << std::setprecision(12);
  const std::vector<int> depths = f.single_rx ? std::vector<int>{1} : f.depths;
  for (int d : depths) {
    const auto fam = f.single_rx ? diag::single_rx_family() : diag::mixer_family(f.n_qubits, d);
    const auto r = diag::estimate_fim(fam, f.theta_samples, f.data_samples, seed, d);
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
      eig << d << "," << i << "," << r.eigenvalues[i] << "\n";
    }
    sum << d << "," << r.n_params << "," << r.numerical_rank << "," << r.mean_eigenvalue << ","
        << r.mean_eigenvalue_stderr << "," << r.max_asymmetry << "\n";
    std::cout << fam.name << " depth " << d << ": " << r.n_params << " params, rank "
              << r.numerical_rank << ", mean eigenvalue " << r.mean_eigenvalue << "\n";
  }
  m.artifact(dir / "fim_eigenvalues.csv");
  m.artifact(dir / "fim_summary.csv");
  m.write(dir);
  return kOk;
}

// diag-fourier

struct FourierFlags {
  int n_qubits = 1;
  std::vector<int> encodings{1, 2, 3};
  int grid = 64;
  int draws = 4;
};

int cmd_diag_fourier(const Common& c, const FourierFlags& f) {
  auto l = load_config(c);
  const auto dir = out_dir(c, l.cfg, "diag-fourier");
  Manifest m("diag-fourier", l, c);
  const std::uint64_t seed = c.seed.value_or(0);
  m["seed"] = seed;
  std::ofstream spec(dir / "fourier_spectrum.csv");
  spec << "encodings,frequency,magnitude\n" << std::setprecision(12);
  for (int e : f.encodings) {
    const auto r = diag::fourier_spectrum_random(f.n_qubits, e, f.draws, f.grid, seed);
    for (std::size_t i = 0; i < r.frequencies.size(); ++i) {
      spec << e << "," << r.frequencies[i] << "," << std::abs(r.coefficients[i]) << "\n";
    }
    std::cout << "encodings " << e << ": " << r.nonzero_count << " nonzero of "
              << r.admissible_count << " admissible, max outside band " << r.max_outside_band << "\n";
  }
  m.artifact(dir / "fourier_spectrum.csv");
  m.write(dir);
  return kOk;
}

// noise-shots

struct ShotFlags {
  std::string profile;
  std::vector<int> shots{100, 500, 1000, 5000, 10000};
  int repeats = 10;
  int n_qubits = 5;
};

int cmd_noise_shots(const Common& c, const ShotFlags& f) {
  auto l = load_config(c);
  if (!f.profile.empty()) l.cfg.noise_profile = f.profile;
  noise::NoiseModel nm;
  if (l.cfg.noise_profile.empty() || l.cfg.noise_profile == "heron-like") nm = noise::NoiseModel::heron_like();
  else if (l.cfg.noise_profile == "ideal") nm = noise::NoiseModel::ideal();
  else nm = noise::load_noise_profile(l.cfg.noise_profile);
  const auto dir = out_dir(c, l.cfg, "noise-shots");
  Manifest m("noise-shots", l, c);
  const std::uint64_t seed = c.seed.value_or(42);
  m["seed"] = seed;
  m["noise_model"] = noise::to_json(nm);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int n = f.n_qubits;
  const auto params = mixer::MixerParams::random(n, n, 1, rng);
  auto scaler = mixer::RobustScalerState::create(2 * n);
  std::vector<double> batch(64 * 2 * static_cast<std::size_t>(n));
  for (auto& v : batch) v = nd(rng);
  mixer::scaler_update(scaler, batch, 64);
  scaler.mode = mixer::ScalerMode::Inference;
  std::vector<double> row(2 * static_cast<std::size_t>(n));
  for (auto& v : row) v = nd(rng);

  const auto t0 = std::chrono::steady_clock::now();
  const auto r = noise::shot_sweep(params, scaler, row, nm, f.shots, f.repeats, seed);
  m.phase("sweep", seconds_since(t0));
  std::ofstream csv(dir / "shots.csv");
  noise::write_shot_csv(csv, r);
  m["bias_mse"] = r.bias_mse;
  std::cout << "noise model " << nm.name << ", bias MSE " << r.bias_mse << "\n";
  for (std::size_t i = 0; i < r.shots_grid.size(); ++i) {
    std::cout << "  shots " << std::setw(7) << r.shots_grid[i] << "  MSE " << r.mse_mean[i]
              << " +- " << r.mse_std[i] << "\n";
  }
  m.artifact(dir / "shots.csv");
  m.write(dir);
  return kOk;
}

// plot

int cmd_plot(const std::string& input, std::string output, std::string title) {
  if (!fs::exists(input)) throw DataError("CSV not found: " + input);
  if (output.empty()) output = fs::path(input).replace_extension(".svg").string();
  if (title.empty()) title = fs::path(input).stem().string();
  const auto table = plot::read_csv(input);
  std::ofstream(output) << plot::render_csv(table, title);
  std::cout << "wrote " << output << "\n";
  return kOk;
}

int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    std::cerr << "config error: " << x.what() << "\n";
    return kUsage;
  } catch (const ShapeError& x) {
    std::cerr << "usage error: " << x.what() << "\n";
    return kUsage;
  } catch (const IndexError& x) {
    std::cerr << "usage error: " << x.what() << "\n";
    return kUsage;
  } catch (const DomainError& x) {
    std::cerr << "usage error: " << x.what() << "\n";
    return kUsage;
  } catch (const DataError& x) {
    std::cerr << "data error: " << x.what() << "\n";
    return kData;
  } catch (const LoadError& x) {
    std::cerr << "data error: " << x.what() << "\n";
    return kData;
  } catch (const NumericError& x) {
    std::cerr << "numeric error: " << x.what() << "\n";
    return kNumeric;
  } catch (const SamplingError& x) {
    std::cerr << "numeric error: " << x.what() << "\n";
    return kNumeric;
  } catch (const StateError& x) {
    std::cerr << "numeric error: " << x.what() << "\n";
    return kNumeric;
  } catch (const json::exception& x) {
    std::cerr << "config error: " << x.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& x) {
    std::cerr << "data error: " << x.what() << "\n";
    return kData;
  } catch (const std::exception& x) {
    std::cerr << "error: " << x.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid quantum Fourier neural operator toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* s) {
    s->add_option("-c,--config", common.config_path, "JSON run configuration");
    s->add_option("-o,--out", common.out, "output directory");
    s->add_option("--seed", common.seed, "seed override");
    s->add_flag("--deterministic", common.deterministic, "single-threaded reductions");
  };

  ModelFlags mf;
  TrainFlags tf;
  DataFlag df;
  std::vector<int> cq_values{0, 3, 5, 8};

  GenFlags gf;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  add_common(gen);
  gen->add_option("-n,--n-points", gf.n_points, "number of process points");
  gen->add_option("--grid", gf.grid, "grid cells nx ny nz")->expected(3);
  gen->add_option("--sampling", gf.sampling, "grid | lhs");
  gen->add_option("--h-min", gf.h_min, "lower H* bound");
  gen->add_option("--h-max", gf.h_max, "upper H* bound");

  auto* tr = app.add_subcommand("train", "train a model");
  add_common(tr);
  add_model_flags(tr, mf);
  add_train_flags(tr, tf);
  tr->add_option("-d,--data", df.data, "dataset directory");

  EvalFlags ef;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(ev);
  ev->add_option("--checkpoint", ef.checkpoint, "checkpoint file")->required();
  ev->add_option("--split", ef.split, "train | val | test");
  ev->add_option("--fold", ef.fold, "fold index");
  ev->add_option("-d,--data", df.data, "dataset directory");

  auto* sw = app.add_subcommand("sweep-cq", "fold protocol over C_q values");
  add_common(sw);
  add_model_flags(sw, mf);
  add_train_flags(sw, tf);
  sw->add_option("-d,--data", df.data, "dataset directory");
  sw->add_option("--values", cq_values, "C_q values");

  auto* pa = app.add_subcommand("params", "parameter accounting");
  add_common(pa);
  add_model_flags(pa, mf);
  pa->add_option("--values", cq_values, "C_q values");

  FimFlags ff;
  auto* fim = app.add_subcommand("diag-fim", "Fisher information spectra");
  add_common(fim);
  fim->add_option("--n-qubits", ff.n_qubits, "qubits");
  fim->add_option("--depths", ff.depths, "circuit depths");
  fim->add_option("--theta-samples", ff.theta_samples, "parameter draws");
  fim->add_option("--data-samples", ff.data_samples, "input draws");
  fim->add_flag("--single-rx", ff.single_rx, "single RX reference family");

  FourierFlags fo;
  auto* four = app.add_subcommand("diag-fourier", "Fourier spectrum of re-uploading models");
  add_common(four);
  four->add_option("--n-qubits", fo.n_qubits, "qubits");
  four->add_option("--encodings", fo.encodings, "encoding counts");
  four->add_option("--grid", fo.grid, "sample points");
  four->add_option("--draws", fo.draws, "parameter draws");

  ShotFlags sf;
  auto* ns = app.add_subcommand("noise-shots", "MSE versus shots under a noise model");
  add_common(ns);
  ns->add_option("--profile", sf.profile, "heron-like | ideal | JSON file");
  ns->add_option("--shots", sf.shots, "shot counts");
  ns->add_option("--repeats", sf.repeats, "repeats per shot count");
  ns->add_option("--n-qubits", sf.n_qubits, "mixer qubits");

  std::string plot_in, plot_out, plot_title;
  auto* pl = app.add_subcommand("plot", "render a CSV as SVG");
  pl->add_option("csv", plot_in, "input CSV")->required();
  pl->add_option("-o,--out", plot_out, "output SVG");
  pl->add_option("--title", plot_title, "chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen_data(common, gf);
    if (*tr) return cmd_train(common, mf, tf, df);
    if (*ev) return cmd_eval(common, ef, df);
    if (*sw) return cmd_sweep_cq(common, mf, tf, df, cq_values);
    if (*pa) return cmd_params(common, mf, cq_values);
    if (*fim) return cmd_diag_fim(common, ff);
    if (*four) return cmd_diag_fourier(common, fo);
    if (*ns) return cmd_noise_shots(common, sf);
    if (*pl) return cmd_plot(plot_in, plot_out, plot_title);
  } catch (...) {
    return exit_code_for(std::current_exception());
  }
  return kUsage;
}
