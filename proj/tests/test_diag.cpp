#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hqfno/diag.hpp"

using namespace hqfno;
using namespace hqfno::diag;

TEST_CASE("single RX Fisher information is 1 everywhere") {
  const auto f = single_rx_family();
  for (double t : {0.2, 1.0, 2.5, 4.0}) {
    const double th[1] = {t};
    CHECK(fisher_at(f, th, {})[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("estimated FIM is symmetric PSD with a sorted spectrum") {
  const auto rep = estimate_fim(mixer_family(3, 1), 5, 3, 11, 1);
  CHECK(rep.n_params == 6);
  CHECK(rep.max_asymmetry < 1e-12);
  for (std::size_t i = 1; i < rep.eigenvalues.size(); ++i) CHECK(rep.eigenvalues[i] <= rep.eigenvalues[i - 1]);
  CHECK(rep.eigenvalues.back() > -1e-10);
  double trace = 0.0;
  for (int i = 0; i < rep.n_params; ++i) trace += rep.at(i, i);
  CHECK(rep.mean_eigenvalue == doctest::Approx(trace / rep.n_params));
  CHECK(rep.numerical_rank <= rep.n_params);
  CHECK(rep.zx_redundancy == "not computed");
}

TEST_CASE("one-upload model has the closed-form spectrum a + b cos(x) + c sin(x)") {
  const auto m = ReuploadModel::random(1, 1, 5);
  const auto rep = fourier_spectrum(m, 16);
  CHECK(rep.nonzero_count <= 3);
  CHECK(rep.admissible_count == 3);
  CHECK(rep.max_outside_band < 1e-12);
  // Reconstruct f at an off-grid point from the coefficients.
  const double x = 0.377;
  Complex acc = 0.0;
  for (std::size_t i = 0; i < rep.frequencies.size(); ++i) {
    acc += rep.coefficients[i] * std::polar(1.0, rep.frequencies[i] * x);
  }
  CHECK(acc.real() == doctest::Approx(m.evaluate(x)).epsilon(1e-10));
}

TEST_CASE("degree law for several encodings") {
  for (int d = 1; d <= 3; ++d) {
    const auto rep = fourier_spectrum_random(2, d, 3, 24, 40 + d);
    CHECK(rep.nonzero_count == 2 * d + 1);
    CHECK(rep.max_outside_band < 1e-9);
  }
  CHECK_THROWS_AS(fourier_spectrum(ReuploadModel::random(1, 3, 1), 6), DomainError);
}

TEST_CASE("two-feature lattice stays inside the admissible box") {
  const auto rep = fourier_lattice(2, 2, 12, 3);
  CHECK(rep.admissible_count == 25);
  CHECK(rep.nonzero_count <= 25);
  CHECK(rep.max_outside_band < 1e-9);
}
