#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hqfno/train.hpp"

using namespace hqfno;
using namespace hqfno::train;

TEST_CASE("cosine schedule endpoints and hold") {
  TrainConfig c;
  c.lr0 = 1e-3;
  c.eta_min = 1e-5;
  c.t_max = 100;
  CHECK(lr_at(0, c) == doctest::Approx(1e-3));
  CHECK(lr_at(50, c) == doctest::Approx((1e-3 + 1e-5) / 2));
  CHECK(lr_at(100, c) == doctest::Approx(1e-5));
  CHECK(lr_at(250, c) == doctest::Approx(1e-5));
}

TEST_CASE("exponential decay is stepwise") {
  TrainConfig c;
  c.schedule = Schedule::ExpDecay;
  c.lr0 = 1.0;
  CHECK(lr_at(99, c) == 1.0);
  CHECK(lr_at(100, c) == doctest::Approx(0.98));
  CHECK(lr_at(250, c) == doctest::Approx(0.98 * 0.98));
}

TEST_CASE("Lion step by hand") {
  std::vector<double> p{1.0, -1.0, 0.5}, g{0.2, -0.4, 0.0}, m{0.0, 1.0, 0.0};
  lion_step(p, g, m, 0.1, 0.9, 0.99, 0.0);
  // c = 0.1 g + 0.9 m = {0.02, 0.86, 0}: signs {+, +, 0}.
  CHECK(p[0] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(-1.1));
  CHECK(p[2] == 0.5);
  CHECK(m[0] == doctest::Approx(0.002));
  CHECK(m[1] == doctest::Approx(0.99 - 0.004));
  std::vector<double> bad{std::nan("")};
  std::vector<double> p1{0.0}, m1{0.0};
  CHECK_THROWS_AS(lion_step(p1, bad, m1, 0.1, 0.9, 0.99, 0.0, "w"), NumericError);
}

TEST_CASE("global norm clipping") {
  std::vector<double> a{3.0}, b{4.0};
  std::vector<std::span<double>> g{a, b};
  CHECK(clip_global_norm(g, 0.5) == 5.0);
  CHECK(a[0] == doctest::Approx(0.3));
  CHECK(b[0] == doctest::Approx(0.4));
  std::vector<double> c{0.1};
  std::vector<std::span<double>> h{c};
  clip_global_norm(h, 0.5);
  CHECK(c[0] == 0.1);
}

TEST_CASE("ReLoBRaLo balance and update") {
  const double now[2] = {2.0, 1.0}, then[2] = {1.0, 1.0};
  const auto b = Relobralo::balance(now, then, 1.0, 0.0);
  const double e = std::exp(1.0);
  CHECK(b[0] == doctest::Approx(2.0 * e * e / (e * e + e)));
  CHECK(b[0] + b[1] == doctest::Approx(2.0));

  RelobraloConfig cfg;
  cfg.beta = 1.0;  // always look back to the previous weights
  Relobralo r(2, cfg, 1);
  const double l0[2] = {1.0, 1.0};
  CHECK(r.update(l0) == std::vector<double>{1.0, 1.0});
  const double l1[2] = {2.0, 1.0};
  const auto w = r.update(l1);
  const auto bal = Relobralo::balance(l1, l0, cfg.tau, cfg.epsilon);
  CHECK(w[0] == doctest::Approx(0.95 * 1.0 + 0.05 * bal[0]));
  CHECK(w[0] + w[1] == doctest::Approx(2.0));

  cfg.fixed_weights = true;
  Relobralo fixed(2, cfg, 1);
  fixed.update(l0);
  CHECK(fixed.update(l1) == std::vector<double>{1.0, 1.0});
}

TEST_CASE("L1 loss gradients") {
  model::ModelOutput out{RealTensor({1, 1, 1, 1, 2}), RealTensor({1, 1, 1, 1, 2})};
  out.temperature[0] = 0.5;
  out.temperature[1] = 0.1;
  out.alpha[0] = 1.0;
  out.alpha[1] = 0.0;
  Batch b{RealTensor({1, 1, 1, 1, 2}), RealTensor({1, 1, 1, 1, 2}), RealTensor({1, 1, 1, 1, 2}),
          RealTensor({1, 1, 1, 1, 2})};
  b.t_ref[0] = 0.3;
  b.t_ref[1] = 0.3;
  b.alpha[0] = 0.5;
  b.alpha[1] = 0.5;
  b.g[0] = 1.0;
  b.g[1] = 0.5;
  RealTensor gt, ga;
  const auto l = loss_and_grad(out, b, 2.0, 3.0, &gt, &ga);
  CHECK(l.temperature == doctest::Approx((0.2 + 0.5 * 0.2) / 2));
  CHECK(l.alpha == doctest::Approx(0.5));
  CHECK(gt[0] == doctest::Approx(2.0 * 0.5 * 1.0));
  CHECK(gt[1] == doctest::Approx(-2.0 * 0.5 * 0.5));
  CHECK(ga[0] == doctest::Approx(1.5));
  CHECK(ga[1] == doctest::Approx(-1.5));
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.beta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(schedule_from_string("linear"), ConfigError);
}

TEST_CASE("short run logs every step and validates at the end") {
  synthdata::MaterialConstants mat;
  const synthdata::GridSpec g{6, 6, 4};
  std::vector<synthdata::FieldSample> set;
  for (double p : {80.0, 120.0, 160.0}) {
    const double v = 0.5;
    set.push_back(synthdata::generate_fields({p, v, synthdata::h_star(p, v, mat)}, g, mat));
  }
  model::ModelConfig mc;
  mc.layers = 1;
  mc.width = 4;
  mc.modes = {2, 2, 2};
  mc.padding = 1;
  mc.decoder_width = 4;
  mc.c_q = 1;
  mc.mixer = model::MixerKind::Vqc;
  TrainConfig tc;
  tc.steps = 4;
  tc.val_every = 3;
  tc.lr0 = 1e-3;
  tc.t_max = 4;
  const auto r = train_run(mc, tc, set, {}, mat);
  REQUIRE(r.log.size() == 4);
  CHECK(r.log[0].weight_t == 1.0);
  CHECK(r.log[2].val_rel_mae.has_value());
  CHECK(!r.log[1].val_rel_mae.has_value());
  CHECK(r.log[3].val_rel_mae.has_value());
  // Re-evaluating the final parameters reproduces the last validation row.
  const auto rep = evaluate(r.final_params, set, mat);
  CHECK(rep.front().rel_mae == doctest::Approx(*r.log[3].val_rel_mae).epsilon(1e-12));

  tc.steps = 0;
  const auto z = train_run(mc, tc, set, {}, mat);
  CHECK(z.log.empty());
  CHECK(std::isfinite(z.best_val_rel_mae));
}
