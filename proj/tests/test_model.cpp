#include <cmath>
#include <random>

#include "doctest.h"
#include "hqfno/config.hpp"
#include "hqfno/model.hpp"

using namespace hqfno;
using namespace hqfno::model;

namespace {

ModelConfig micro(MixerKind kind, int c_q) {
  ModelConfig c;
  c.layers = 2;
  c.width = 4;
  c.modes = {2, 2, 2};
  c.padding = 1;
  c.decoder_width = 5;
  c.c_q = c_q;
  c.mixer = kind;
  return c;
}

RealTensor random_input(std::vector<std::size_t> shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  RealTensor t(std::move(shape));
  for (auto& v : t.storage()) v = nd(rng);
  return t;
}

}  // namespace

TEST_CASE("closed-form counts agree with allocated parameters") {
  for (auto [kind, cq] : {std::pair{MixerKind::None, 0}, std::pair{MixerKind::Vqc, 2},
                          std::pair{MixerKind::Bottleneck, 3}}) {
    const auto cfg = micro(kind, cq);
    auto p = ModelParams::zeros(cfg);
    const auto b = count_params(cfg);
    CHECK(b.total == p.trainable_count());
    CHECK(b.enumerated_total == b.total);
  }
}

TEST_CASE("spectral count by hand for the classical layer") {
  ModelConfig c;
  c.width = 32;
  // 4 corners * C * C * 25 * 20 * 15 * 2 reals.
  CHECK(count_params(c).spectral_per_layer == 4LL * 32 * 32 * 7500 * 2);
  c.c_q = 5;
  c.mixer = MixerKind::Vqc;
  CHECK(count_params(c).spectral_per_layer == 4LL * 32 * 27 * 7500 * 2);
  CHECK(count_params(c).quantum_per_layer == 127);
}

TEST_CASE("config consistency errors") {
  auto c = micro(MixerKind::None, 2);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = micro(MixerKind::Vqc, 5);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = micro(MixerKind::Vqc, 0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(mixer_kind_from_string("qnn"), ConfigError);
}

TEST_CASE("forward shapes, padding and effective modes") {
  const auto cfg = micro(MixerKind::Vqc, 2);
  const auto p = ModelParams::random(cfg, 1);
  const auto x = random_input({2, 6, 5, 4, 3}, 2);
  ForwardCache cache;
  const auto out = forward(p, x, &cache);
  CHECK(out.temperature.shape() == std::vector<std::size_t>{2, 1, 5, 4, 3});
  CHECK(out.alpha.shape() == out.temperature.shape());
  // Padded grid 6 x 5 x 4 -> min(2, 3), min(2, 2), min(2, 3).
  CHECK(cache.effective_modes.front() == spectral::ModeCounts{2, 2, 2});
  CHECK(layer_modes(cfg, 1, 1, 1) == spectral::ModeCounts{1, 1, 2});
  CHECK_THROWS_AS(forward(p, random_input({1, 5, 5, 4, 3}, 3)), ShapeError);
}

TEST_CASE("inference never touches scaler state; training updates it once") {
  const auto cfg = micro(MixerKind::Vqc, 2);
  auto p = ModelParams::random(cfg, 4);
  const auto x = random_input({1, 6, 4, 4, 3}, 5);
  forward(p, x);
  CHECK(!p.layers[0].scaler.initialized);
  ForwardCache cache;
  forward_train(p, x, cache);
  CHECK(p.layers[0].scaler.initialized);
  const auto lo = p.layers[0].scaler.running_min;
  forward(p, x);
  CHECK(p.layers[0].scaler.running_min == lo);
}

TEST_CASE("weight-norm decoder gradients match finite differences") {
  const auto cfg = micro(MixerKind::None, 0);
  auto p = ModelParams::random(cfg, 6);
  const auto x = random_input({1, 6, 4, 3, 3}, 7);
  const auto wt = random_input({1, 1, 4, 3, 3}, 8);
  const auto wa = random_input({1, 1, 4, 3, 3}, 9);
  auto loss = [&]() {
    const auto o = forward(p, x);
    double s = 0.0;
    for (std::size_t i = 0; i < wt.size(); ++i) s += wt[i] * o.temperature[i] + wa[i] * o.alpha[i];
    return s;
  };
  ForwardCache cache;
  forward(p, x, &cache);
  auto g = ModelParams::zeros(cfg);
  backward(p, cache, wt, wa, g);
  for (std::size_t k = 0; k < p.decoder.size(); ++k) {
    for (std::size_t i = 0; i < p.decoder[k].g.size(); ++i) {
      const double keep = p.decoder[k].g[i];
      p.decoder[k].g[i] = keep + 1e-6;
      const double a = loss();
      p.decoder[k].g[i] = keep - 1e-6;
      const double b = loss();
      p.decoder[k].g[i] = keep;
      CHECK(g.decoder[k].g[i] == doctest::Approx((a - b) / 2e-6).epsilon(1e-6));
    }
    for (std::size_t i = 0; i < p.decoder[k].v.weight.size(); i += 3) {
      const double keep = p.decoder[k].v.weight[i];
      p.decoder[k].v.weight[i] = keep + 1e-6;
      const double a = loss();
      p.decoder[k].v.weight[i] = keep - 1e-6;
      const double b = loss();
      p.decoder[k].v.weight[i] = keep;
      CHECK(g.decoder[k].v.weight[i] == doctest::Approx((a - b) / 2e-6).epsilon(1e-6));
    }
  }
}

TEST_CASE("bottleneck model gradients match finite differences") {
  const auto cfg = micro(MixerKind::Bottleneck, 2);
  auto p = ModelParams::random(cfg, 10);
  const auto x = random_input({1, 6, 4, 4, 3}, 11);
  {
    ForwardCache warm;
    forward_train(p, x, warm);
  }
  const auto wt = random_input({1, 1, 4, 4, 3}, 12);
  const auto wa = random_input({1, 1, 4, 4, 3}, 13);
  ForwardCache cache;
  forward(p, x, &cache);
  auto g = ModelParams::zeros(cfg);
  backward(p, cache, wt, wa, g);
  auto ps = p.parameters();
  auto gs = g.parameters();
  for (std::size_t t = 0; t < ps.size(); ++t) {
    if (ps[t].name.find("bottleneck") == std::string::npos) continue;
    for (std::size_t i = 0; i < ps[t].values.size(); ++i) {
      const double keep = ps[t].values[i];
      auto eval = [&](double v) {
        ps[t].values[i] = v;
        const auto o = forward(p, x);
        double s = 0.0;
        for (std::size_t j = 0; j < wt.size(); ++j) s += wt[j] * o.temperature[j] + wa[j] * o.alpha[j];
        return s;
      };
      const double fd = (eval(keep + 1e-6) - eval(keep - 1e-6)) / 2e-6;
      ps[t].values[i] = keep;
      CHECK(gs[t].values[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("checkpoint round trip is exact") {
  const auto cfg = micro(MixerKind::Vqc, 2);
  auto p = ModelParams::random(cfg, 14);
  ForwardCache warm;
  const auto x = random_input({1, 6, 4, 4, 3}, 15);
  forward_train(p, x, warm);
  const auto bytes = save_checkpoint(p);
  auto q = load_checkpoint(bytes);
  auto a = p.parameters();
  auto b = q.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].name == b[t].name);
    for (std::size_t i = 0; i < a[t].values.size(); ++i) CHECK(a[t].values[i] == b[t].values[i]);
  }
  CHECK(q.layers[1].scaler.initialized);
  const auto o1 = forward(p, x), o2 = forward(q, x);
  for (std::size_t i = 0; i < o1.temperature.size(); ++i) CHECK(o1.temperature[i] == o2.temperature[i]);
}

TEST_CASE("corrupt checkpoints raise LoadError") {
  auto p = ModelParams::random(micro(MixerKind::None, 0), 16);
  auto bytes = save_checkpoint(p);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 8);
  CHECK_THROWS_AS(load_checkpoint(truncated), LoadError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(load_checkpoint(bad_magic), LoadError);
  // Edit the stored width so every shape disagrees.
  std::string text(bytes.begin(), bytes.end());
  const auto pos = text.find("\"width\":4");
  REQUIRE(pos != std::string::npos);
  text[pos + 8] = '5';
  std::vector<std::uint8_t> edited(text.begin(), text.end());
  CHECK_THROWS_AS(load_checkpoint(edited), LoadError);
}

TEST_CASE("run config: defaults, overlay and unknown keys") {
  const auto c = config::parse_run_config(config::json::object());
  CHECK(c.model.width == 32);
  CHECK(c.model.modes == spectral::ModeCounts{25, 20, 15});
  CHECK(c.model.padding == 9);
  CHECK(c.train.relobralo.tau == 3.0);
  CHECK(c.train.grad_clip == 0.5);
  const auto d = config::parse_run_config(
      config::json::parse(R"({"schema_version": 1, "model": {"c_q": 5, "mixer": "vqc"}})"));
  CHECK(d.model.c_q == 5);
  CHECK(d.model.width == 32);
  CHECK_THROWS_AS(config::parse_run_config(config::json::parse(R"({"model": {"widht": 8}})")), ConfigError);
  CHECK_THROWS_AS(config::parse_run_config(config::json::parse(R"({"schema_version": 2})")), ConfigError);
  CHECK_THROWS_AS(config::parse_run_config(config::json::parse(R"({"model": {"c_q": 5}})")), ConfigError);
  CHECK(config::text_hash("abc") == config::text_hash("abc"));
  CHECK(config::text_hash("abc").size() == 16);
}
