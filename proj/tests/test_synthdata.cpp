#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "hqfno/synthdata.hpp"

using namespace hqfno;
using namespace hqfno::synthdata;
namespace fs = std::filesystem;

TEST_CASE("H* reference value and inverse") {
  const MaterialConstants mat;
  CHECK(h_star(100.0, 0.5, mat) == doctest::Approx(5.322287547849002).epsilon(1e-12));
  for (double h : {2.0, 7.5, 19.0}) {
    for (double p : {40.0, 120.0}) CHECK(h_star(p, speed_for(h, p, mat), mat) == doctest::Approx(h));
  }
  CHECK_THROWS_AS(h_star(100.0, 0.0, mat), DomainError);
}

TEST_CASE("window sampling keeps speeds in range and reports rejections") {
  const MaterialConstants mat;
  for (auto mode : {SamplingMode::Grid, SamplingMode::LatinHypercube}) {
    WindowSpec w;
    w.mode = mode;
    const auto r = sample_window(60, w, mat, 3);
    CHECK(r.points.size() + r.rejected == 60);
    for (const auto& p : r.points) {
      CHECK(p.speed >= w.v_min);
      CHECK(p.speed <= w.v_max);
      CHECK(p.h_star == doctest::Approx(h_star(p.power, p.speed, mat)));
    }
  }
  WindowSpec impossible;
  impossible.v_min = 50.0;
  impossible.v_max = 60.0;
  CHECK_THROWS_AS(sample_window(10, impossible, mat, 1), SamplingError);
}

TEST_CASE("Latin hypercube puts one point in each H* stratum") {
  const MaterialConstants mat;
  WindowSpec w;
  w.v_min = 0.0;
  w.v_max = 1e9;
  const auto r = sample_window(20, w, mat, 9);
  REQUIRE(r.points.size() == 20);
  std::vector<int> seen(20, 0);
  for (const auto& p : r.points) {
    const auto k = static_cast<int>((p.h_star - w.h_min) / (w.h_max - w.h_min) * 20);
    seen[std::min(k, 19)]++;
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST_CASE("depression depth is zero at H* = 0 and grows with H*") {
  const SurfaceModel s;
  CHECK(s.depth(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s.depth(5.0) < s.depth(10.0));
  CHECK(s.depth(10.0) < s.depth(20.0));
  CHECK(s.depth(1e6) == doctest::Approx(s.depth_max));
}

TEST_CASE("fields: peak near the source, capped at boiling, alpha in [0, 1]") {
  const MaterialConstants mat;
  const GridSpec g;
  const ProcessPoint p{150.0, 0.4, h_star(150.0, 0.4, mat)};
  const auto s = generate_fields(p, g, mat);
  REQUIRE(s.temperature.size() == g.cells());
  const auto mx = *std::max_element(s.temperature.begin(), s.temperature.end());
  const auto mn = *std::min_element(s.temperature.begin(), s.temperature.end());
  CHECK(mx <= mat.t_boil);
  CHECK(mn >= mat.t_ambient);
  for (double a : s.alpha) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
  // Top layer is gas, bottom layer is metal.
  CHECK(s.alpha[g.nz - 1] < 0.01);
  CHECK(s.alpha[0] > 0.99);
}

TEST_CASE("masking and liquid fraction") {
  const MaterialConstants mat;
  CHECK(mask_weight(0.5) == 0.5);
  CHECK(mask_weight(1.0) == doctest::Approx(0.5 * (std::tanh(10.0) + 1.0)));
  CHECK(liquid_fraction(1873.0, mat) == 0.0);
  CHECK(liquid_fraction(1898.0, mat) == 0.5);
  CHECK(liquid_fraction(5000.0, mat) == 1.0);
  const std::vector<double> t{1000.0, 2500.0};
  const std::vector<double> a{0.5, 1.0};
  const auto m = mask_fields(t, a, mat);
  CHECK(m.t_tilde[0] == doctest::Approx(mat.t_boil + 0.5 * (1000.0 - mat.t_boil)));
  const auto n = normalized_temperatures(mat);
  CHECK(n.t_boil == doctest::Approx(mat.t_boil / mat.t_ref));
}

TEST_CASE("model input channels") {
  const MaterialConstants mat;
  const GridSpec g{4, 3, 2};
  const ProcessPoint p{50.0, 0.2, 3.0};
  model::InputFeatures f;
  const auto in = make_input(p, g, f);
  REQUIRE(in.shape() == std::vector<std::size_t>{1, 6, 4, 3, 2});
  const std::size_t n = g.cells();
  CHECK(in[0 * n + (3 * 3 + 0) * 2 + 0] == 1.0);  // x of the last cell along x
  CHECK(in[3 * n] == doctest::Approx(5.0));
  CHECK(in[4 * n] == doctest::Approx(2.0));
  CHECK(in[5 * n] == doctest::Approx(0.4));
  f.h_star = false;
  CHECK(make_input(p, g, f).dim(1) == 5);
}

TEST_CASE("dataset round trip and split disjointness") {
  const MaterialConstants mat;
  const fs::path dir = fs::temp_directory_path() / "hqfno_test_dataset";
  fs::remove_all(dir);
  GenerateOptions opt;
  opt.n_points = 20;
  opt.grid = {6, 5, 4};
  opt.seed = 4;
  const auto idx = generate_dataset(dir, opt, mat);
  const auto back = read_index(dir);
  CHECK(back.train == idx.train);
  CHECK(back.test == idx.test);
  CHECK(!idx.val.empty());
  for (const auto& f : idx.val) CHECK(std::find(idx.train.begin(), idx.train.end(), f) == idx.train.end());
  const auto loaded = load_split(dir, idx.train, mat);
  const auto direct = generate_fields(loaded.front().point, opt.grid, mat);
  for (std::size_t i = 0; i < direct.temperature.size(); ++i) {
    CHECK(loaded.front().temperature[i] == doctest::Approx(direct.temperature[i]).epsilon(1e-6));
  }
  MaterialConstants other = mat;
  other.absorptivity = 0.4;
  CHECK_THROWS_AS(read_sample(dir / idx.train.front(), other), DataError);
  fs::remove_all(dir);
}
