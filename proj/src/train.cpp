#include "hqfno/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>

namespace hqfno::train {

std::string to_string(Schedule s) { return s == Schedule::Cosine ? "cosine" : "exp_decay"; }

Schedule schedule_from_string(const std::string& name) {
  if (name == "cosine") return Schedule::Cosine;
  if (name == "exp_decay") return Schedule::ExpDecay;
  throw ConfigError("unknown schedule '" + name + "' (cosine | exp_decay)");
}

void TrainConfig::validate() const {
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (!(lr0 > 0.0) || eta_min < 0.0 || t_max < 1) throw ConfigError("invalid learning-rate schedule");
  if (!(decay_rate > 0.0) || decay_every < 1) throw ConfigError("invalid exponential decay");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("Lion betas must lie in [0, 1)");
  }
  if (weight_decay < 0.0 || !(grad_clip > 0.0)) throw ConfigError("invalid decay or clip");
  if (batch_train < 1 || batch_val < 1 || val_every < 1 || folds < 1) {
    throw ConfigError("batch sizes, val_every and folds must be >= 1");
  }
  if (relobralo.alpha < 0.0 || relobralo.alpha > 1.0 || relobralo.beta < 0.0 ||
      relobralo.beta > 1.0 || !(relobralo.tau > 0.0) || !(relobralo.epsilon > 0.0)) {
    throw ConfigError("invalid ReLoBRaLo parameters");
  }
}

double lr_at(int step, const TrainConfig& cfg) {
  if (step < 0) throw DomainError("step must be >= 0");
  if (cfg.schedule == Schedule::Cosine) {
    const double t = std::min(static_cast<double>(step), static_cast<double>(cfg.t_max));
    return cfg.eta_min +
           (cfg.lr0 - cfg.eta_min) * (1.0 + std::cos(std::numbers::pi * t / cfg.t_max)) / 2.0;
  }
  return cfg.lr0 * std::pow(cfg.decay_rate, step / cfg.decay_every);
}

void lion_step(std::span<double> params, std::span<const double> grads,
               std::span<double> momenta, double lr, double beta1, double beta2,
               double weight_decay, const std::string& name) {
  if (params.size() != grads.size() || params.size() != momenta.size()) {
    throw ShapeError("Lion: parameter, gradient and momentum sizes differ for " + name);
  }
  for (double g : grads) {
    if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + name);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double c = beta1 * momenta[i] + (1.0 - beta1) * grads[i];
    const double s = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
    params[i] -= lr * (s + weight_decay * params[i]);
    momenta[i] = beta2 * momenta[i] + (1.0 - beta2) * grads[i];
  }
}

double clip_global_norm(std::vector<std::span<double>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& g : grads) {
      for (double& v : g) v *= s;
    }
  }
  return norm;
}

Relobralo::Relobralo(std::size_t terms, RelobraloConfig cfg, std::uint64_t seed)
    : cfg_(cfg), weights_(terms, 1.0), rng_(seed), lookback_(cfg.beta) {
  if (terms == 0) throw ConfigError("ReLoBRaLo needs at least one loss term");
}

std::vector<double> Relobralo::balance(std::span<const double> now, std::span<const double> then,
                                       double tau, double eps) {
  const std::size_t m = now.size();
  std::vector<double> z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = now[i] / (tau * then[i] + eps);
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (auto& v : z) v = static_cast<double>(m) * v / sum;
  return z;
}

std::vector<double> Relobralo::update(std::span<const double> losses) {
  if (losses.size() != weights_.size()) throw ShapeError("ReLoBRaLo: wrong number of losses");
  if (cfg_.fixed_weights) return weights_;
  if (!started_) {
    initial_.assign(losses.begin(), losses.end());
    previous_ = initial_;
    started_ = true;
    return weights_;
  }
  const double rho = lookback_(rng_) ? 1.0 : 0.0;
  const auto bal0 = balance(losses, initial_, cfg_.tau, cfg_.epsilon);
  const auto bal1 = balance(losses, previous_, cfg_.tau, cfg_.epsilon);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double hist = rho * weights_[i] + (1.0 - rho) * bal0[i];
    weights_[i] = cfg_.alpha * hist + (1.0 - cfg_.alpha) * bal1[i];
  }
  previous_.assign(losses.begin(), losses.end());
  return weights_;
}

Batch make_batch(const std::vector<const synthdata::FieldSample*>& samples,
                 const model::InputFeatures& features, const synthdata::MaterialConstants& mat) {
  if (samples.empty()) throw DomainError("empty batch");
  const auto& grid = samples.front()->grid;
  const std::size_t n = grid.cells();
  const std::size_t b = samples.size();
  const auto c = static_cast<std::size_t>(features.count());
  Batch out{RealTensor({b, c, grid.nx, grid.ny, grid.nz}),
            RealTensor({b, 1, grid.nx, grid.ny, grid.nz}),
            RealTensor({b, 1, grid.nx, grid.ny, grid.nz}),
            RealTensor({b, 1, grid.nx, grid.ny, grid.nz})};
  for (std::size_t i = 0; i < b; ++i) {
    const auto& s = *samples[i];
    if (s.grid.nx != grid.nx || s.grid.ny != grid.ny || s.grid.nz != grid.nz) {
      throw ShapeError("batch samples must share one grid");
    }
    const auto in = synthdata::make_input(s.point, s.grid, features);
    std::copy_n(in.data(), c * n, out.input.data() + i * c * n);
    for (std::size_t p = 0; p < n; ++p) {
      out.t_ref[i * n + p] = s.temperature[p] / mat.t_ref;
      out.alpha[i * n + p] = s.alpha[p];
      out.g[i * n + p] = synthdata::mask_weight(s.alpha[p]);
    }
  }
  return out;
}

LossTerms loss_and_grad(const model::ModelOutput& out, const Batch& batch, double w_t,
                        double w_alpha, RealTensor* grad_t, RealTensor* grad_alpha) {
  const std::size_t n = batch.t_ref.size();
  if (out.temperature.size() != n || out.alpha.size() != n) {
    throw ShapeError("model output does not match the batch");
  }
  LossTerms l;
  const double inv = 1.0 / static_cast<double>(n);
  if (grad_t) *grad_t = RealTensor(out.temperature.shape());
  if (grad_alpha) *grad_alpha = RealTensor(out.alpha.shape());
  for (std::size_t i = 0; i < n; ++i) {
    // T~_pred - T~_ref = g (T_pred - T_ref); the T_boil terms cancel.
    const double g = batch.g[i];
    const double et = g * (out.temperature[i] - batch.t_ref[i]);
    const double ea = out.alpha[i] - batch.alpha[i];
    l.temperature += std::abs(et) * inv;
    l.alpha += std::abs(ea) * inv;
    if (grad_t) (*grad_t)[i] = w_t * inv * g * ((et > 0.0) - (et < 0.0));
    if (grad_alpha) (*grad_alpha)[i] = w_alpha * inv * ((ea > 0.0) - (ea < 0.0));
  }
  return l;
}

std::vector<metrics::MetricReport> evaluate(const model::ModelParams& params,
                                            const std::vector<synthdata::FieldSample>& samples,
                                            const synthdata::MaterialConstants& mat,
                                            int batch_size) {
  if (samples.empty()) throw DomainError("evaluation set is empty");
  metrics::ErrorAccumulator acc_t, acc_a, acc_f;
  std::vector<double> iou_a, iou_f;
  for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(samples.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<const synthdata::FieldSample*> ptrs;
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&samples[i]);
    const Batch batch = make_batch(ptrs, params.config.inputs, mat);
    const auto out = model::forward(params, batch.input);
    const std::size_t n = samples[start].grid.cells();
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
      const auto& s = *ptrs[i];
      std::vector<double> t_pred(n), a_pred(n);
      for (std::size_t p = 0; p < n; ++p) {
        t_pred[p] = out.temperature[i * n + p] * mat.t_ref;
        a_pred[p] = out.alpha[i * n + p];
      }
      const auto ref = synthdata::mask_fields(s.temperature, s.alpha, mat);
      const auto pred_t = synthdata::mask_fields(t_pred, s.alpha, mat);
      const auto pred_own = synthdata::mask_fields(t_pred, a_pred, mat);
      acc_t.add(pred_t.t_tilde, ref.t_tilde);
      acc_a.add(a_pred, s.alpha);
      acc_f.add(pred_own.liquid_fraction, ref.liquid_fraction);
      iou_a.push_back(metrics::iou(a_pred, s.alpha));
      iou_f.push_back(metrics::iou(pred_own.liquid_fraction, ref.liquid_fraction));
    }
  }
  auto report = [&](const std::string& name, const metrics::ErrorAccumulator& acc,
                    const std::vector<double>* ious) {
    metrics::MetricReport r;
    r.field_name = name;
    r.mae = acc.mae();
    r.rmse = acc.rmse();
    const auto rel = metrics::relative_errors(r.mae, r.rmse, acc.mean_ref());
    r.rel_mae = rel.rel_mae;
    r.rel_rmse = rel.rel_rmse;
    r.n_samples = samples.size();
    if (ious) {
      const auto st = metrics::fold_stats(*ious);
      r.iou_mean = st.mean;
      r.iou_std = st.std;
    }
    return r;
  };
  return {report("T_tilde", acc_t, nullptr), report("alpha", acc_a, &iou_a),
          report("f_l", acc_f, &iou_f)};
}

void write_log_csv(std::ostream& out, const std::vector<LogRow>& rows) {
  out << "step,lr,loss_t,loss_alpha,weight_t,weight_alpha,loss_total,grad_norm,val_rel_mae\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.step << "," << r.lr << "," << r.loss_t << "," << r.loss_alpha << "," << r.weight_t
        << "," << r.weight_alpha << "," << r.loss_total << "," << r.grad_norm << ",";
    if (r.val_rel_mae) out << *r.val_rel_mae;
    out << "\n";
  }
}

std::pair<double, double> loss_endpoints(const std::vector<LogRow>& log, std::size_t window) {
  if (log.empty()) throw DomainError("empty training log");
  const std::size_t w = std::min(window, log.size());
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    first += log[i].loss_total;
    last += log[log.size() - w + i].loss_total;
  }
  return {first / static_cast<double>(w), last / static_cast<double>(w)};
}

TrainResult train_run(const model::ModelConfig& model_cfg, const TrainConfig& cfg,
                      const std::vector<synthdata::FieldSample>& train_set,
                      const std::vector<synthdata::FieldSample>& val_set,
                      const synthdata::MaterialConstants& mat,
                      const std::filesystem::path& out_dir) {
  cfg.validate();
  model_cfg.validate();
  if (train_set.empty()) throw DataError("training split is empty");
  const bool write = !out_dir.empty();
  if (write) std::filesystem::create_directories(out_dir);

  auto params = model::ModelParams::random(model_cfg, cfg.seed);
  auto grads = model::ModelParams::zeros(model_cfg);
  auto momenta = model::ModelParams::zeros(model_cfg);
  auto p_spans = params.parameters();
  auto g_spans = grads.parameters();
  auto m_spans = momenta.parameters();

  std::mt19937_64 rng(cfg.seed ^ 0x7a11ULL);
  Relobralo balancer(2, cfg.relobralo, cfg.seed ^ 0xb41aULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  TrainResult result;
  result.best_val_rel_mae = std::numeric_limits<double>::infinity();
  auto validate_now = [&]() -> double {
    const auto& set = val_set.empty() ? train_set : val_set;
    return evaluate(params, set, mat, cfg.batch_val).front().rel_mae;
  };
  auto save = [&](const char* name) {
    if (write) model::save_checkpoint_file(params, (out_dir / name).string());
  };

  if (cfg.steps == 0) {
    result.best_val_rel_mae = validate_now();
    save("best.ckpt");
  }

  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<const synthdata::FieldSample*> ptrs;
    for (int b = 0; b < cfg.batch_train; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      ptrs.push_back(&train_set[order[cursor++]]);
    }
    const Batch batch = make_batch(ptrs, model_cfg.inputs, mat);
    model::ForwardCache cache;
    const auto out = model::forward_train(params, batch.input, cache);
    const auto raw = loss_and_grad(out, batch, 1.0, 1.0, nullptr, nullptr);
    if (!std::isfinite(raw.temperature) || !std::isfinite(raw.alpha)) {
      throw NumericError("non-finite loss at step " + std::to_string(step));
    }
    const double terms[2] = {raw.temperature, raw.alpha};
    const auto w = balancer.update(terms);
    RealTensor gt, ga;
    loss_and_grad(out, batch, w[0], w[1], &gt, &ga);

    for (auto& g : g_spans) std::fill(g.values.begin(), g.values.end(), 0.0);
    model::backward(params, cache, gt, ga, grads);
    std::vector<std::span<double>> gv;
    for (auto& g : g_spans) gv.push_back(g.values);
    const double gnorm = clip_global_norm(gv, cfg.grad_clip);
    const double lr = lr_at(step, cfg);
    for (std::size_t i = 0; i < p_spans.size(); ++i) {
      lion_step(p_spans[i].values, g_spans[i].values, m_spans[i].values, lr, cfg.beta1, cfg.beta2,
                cfg.weight_decay, p_spans[i].name);
    }

    LogRow row;
    row.step = step;
    row.lr = lr;
    row.loss_t = raw.temperature;
    row.loss_alpha = raw.alpha;
    row.weight_t = w[0];
    row.weight_alpha = w[1];
    row.loss_total = raw.temperature + raw.alpha;
    row.grad_norm = gnorm;
    if ((step + 1) % cfg.val_every == 0 || step + 1 == cfg.steps) {
      const double v = validate_now();
      row.val_rel_mae = v;
      if (v < result.best_val_rel_mae) {
        result.best_val_rel_mae = v;
        result.best_step = step + 1;
        result.best_params = params;
        save("best.ckpt");
      }
    }
    result.log.push_back(row);
  }

  if (result.best_params.layers.empty()) result.best_params = params;
  save("final.ckpt");
  if (write) {
    std::ofstream log(out_dir / "log.csv");
    write_log_csv(log, result.log);
  }
  result.final_params = std::move(params);
  return result;
}

}  // namespace hqfno::train
