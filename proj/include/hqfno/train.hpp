#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hqfno/metrics.hpp"
#include "hqfno/model.hpp"
#include "hqfno/synthdata.hpp"

namespace hqfno::train {

enum class Schedule { Cosine, ExpDecay };

std::string to_string(Schedule s);
Schedule schedule_from_string(const std::string& name);

struct RelobraloConfig {
  double alpha = 0.95;
  double beta = 0.99;
  double tau = 3.0;
  double epsilon = 1e-8;
  bool fixed_weights = false;
};

struct TrainConfig {
  int steps = 6000;
  double lr0 = 1e-4;
  Schedule schedule = Schedule::Cosine;
  int t_max = 6000;
  double eta_min = 1e-5;
  double decay_rate = 0.98;
  int decay_every = 100;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double weight_decay = 0.0;
  double grad_clip = 0.5;
  int batch_train = 1;
  int batch_val = 5;
  int val_every = 50;
  RelobraloConfig relobralo;
  int folds = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// cosine: eta_min + (lr0 - eta_min)(1 + cos(pi step / T_max)) / 2, held at
/// eta_min past T_max; exp: lr0 * rate^floor(step / every).
double lr_at(int step, const TrainConfig& cfg);

/// Lion: p -= lr (sign(b1 m + (1 - b1) g) + wd p); m = b2 m + (1 - b2) g.
/// Throws NumericError naming `name` on a non-finite gradient.
void lion_step(std::span<double> params, std::span<const double> grads,
               std::span<double> momenta, double lr, double beta1, double beta2,
               double weight_decay, const std::string& name = "parameter");

/// Scales all spans in place so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_global_norm(std::vector<std::span<double>>& grads, double max_norm);

/// Relative loss balancing with random lookback.
class Relobralo {
 public:
  Relobralo(std::size_t terms, RelobraloConfig cfg, std::uint64_t seed);

  /// Records this step's losses and returns the weights to use for them.
  std::vector<double> update(std::span<const double> losses);
  const std::vector<double>& weights() const { return weights_; }
  /// m * softmax(L(t) / (tau L(t') + eps)).
  static std::vector<double> balance(std::span<const double> now, std::span<const double> then,
                                     double tau, double eps);

 private:
  RelobraloConfig cfg_;
  std::vector<double> weights_;
  std::vector<double> initial_;
  std::vector<double> previous_;
  std::mt19937_64 rng_;
  std::bernoulli_distribution lookback_;
  bool started_ = false;
};

/// Per-sample tensors ready for the model.
struct Batch {
  RealTensor input;   // (B, C_in, X, Y, Z)
  RealTensor t_ref;   // (B, 1, X, Y, Z), T / T_ref
  RealTensor alpha;   // (B, 1, X, Y, Z)
  RealTensor g;       // mask weight from the reference alpha
};

Batch make_batch(const std::vector<const synthdata::FieldSample*>& samples,
                 const model::InputFeatures& features, const synthdata::MaterialConstants& mat);

struct LossTerms {
  double temperature = 0.0;  // mean |g (T_pred - T_ref)|, normalized units
  double alpha = 0.0;        // mean |alpha_pred - alpha_ref|
};

/// L1 losses and their gradients w.r.t. the two model outputs.
LossTerms loss_and_grad(const model::ModelOutput& out, const Batch& batch, double w_t,
                        double w_alpha, RealTensor* grad_t, RealTensor* grad_alpha);

/// Reports for T~ (Kelvin), alpha and f_l over a sample set, with set-level
/// means and per-sample IoU statistics.
std::vector<metrics::MetricReport> evaluate(const model::ModelParams& params,
                                            const std::vector<synthdata::FieldSample>& samples,
                                            const synthdata::MaterialConstants& mat,
                                            int batch_size = 5);

struct LogRow {
  int step = 0;
  double lr = 0.0;
  double loss_t = 0.0;
  double loss_alpha = 0.0;
  double weight_t = 1.0;
  double weight_alpha = 1.0;
  double loss_total = 0.0;  // unweighted sum
  double grad_norm = 0.0;
  std::optional<double> val_rel_mae;
};

void write_log_csv(std::ostream& out, const std::vector<LogRow>& rows);

struct TrainResult {
  model::ModelParams final_params;
  model::ModelParams best_params;
  std::vector<LogRow> log;
  double best_val_rel_mae = 0.0;
  int best_step = 0;
};

/// Full training loop. Writes log.csv, final.ckpt and best.ckpt into
/// `out_dir` when it is non-empty.
TrainResult train_run(const model::ModelConfig& model_cfg, const TrainConfig& cfg,
                      const std::vector<synthdata::FieldSample>& train_set,
                      const std::vector<synthdata::FieldSample>& val_set,
                      const synthdata::MaterialConstants& mat,
                      const std::filesystem::path& out_dir = {});

/// Mean of the first and last `window` unweighted step losses.
std::pair<double, double> loss_endpoints(const std::vector<LogRow>& log, std::size_t window = 10);

}  // namespace hqfno::train
