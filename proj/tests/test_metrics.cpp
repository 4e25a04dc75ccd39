#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hqfno/metrics.hpp"
#include "hqfno/errors.hpp"

using namespace hqfno;
using namespace hqfno::metrics;

TEST_CASE("MAE and RMSE fixtures") {
  const std::vector<double> p{2, 2, 2, 2}, r{1, 3, 2, 6};
  const auto e = field_errors(p, r);
  CHECK(e.mae == 1.5);             // (1 + 1 + 0 + 4) / 4
  CHECK(e.rmse == std::sqrt(4.5));  // (1 + 1 + 0 + 16) / 4
  CHECK_THROWS_AS(field_errors(std::vector<double>{}, std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(field_errors(p, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("relative errors divide by the set mean") {
  const auto r = relative_errors(3.0, 4.0, 10.0, 0.0);
  CHECK(r.rel_mae == 0.3);
  CHECK(r.rel_rmse == 0.4);
}

TEST_CASE("accumulator pools samples before dividing") {
  ErrorAccumulator acc;
  acc.add(std::vector<double>{1, 1}, std::vector<double>{0, 0});
  acc.add(std::vector<double>{4}, std::vector<double>{1});
  CHECK(acc.count() == 3);
  CHECK(acc.mae() == doctest::Approx(5.0 / 3.0));
  CHECK(acc.rmse() == doctest::Approx(std::sqrt(11.0 / 3.0)));
  CHECK(acc.mean_ref() == doctest::Approx(1.0 / 3.0));
  ErrorAccumulator empty;
  CHECK_THROWS_AS(empty.mae(), DomainError);
}

TEST_CASE("IoU thresholding is strict and an empty union scores 1") {
  const std::vector<double> a{0.51, 0.5, 0.9, 0.0}, b{0.6, 0.9, 0.1, 0.0};
  // a: {0, 2}; b: {0, 1}; intersection {0}; union {0, 1, 2}.
  CHECK(iou(a, b) == 1.0 / 3.0);
  CHECK(iou(std::vector<double>{0.5, 0.1}, std::vector<double>{0.2, 0.5}) == 1.0);
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, b, 0.0) == 1.0);
  CHECK(iou(a, b, 0.55) == 0.0);
}

TEST_CASE("fold statistics and formats") {
  const std::vector<double> v{1.0, 2.0, 4.0, 5.0};
  const auto s = fold_stats(v);
  CHECK(s.mean == 3.0);
  CHECK(s.std == doctest::Approx(std::sqrt(2.5)));
  CHECK(format_mean_range(s, 2) == "3.00 [1.00, 5.00]");
  CHECK(format_mean_std(s, 2) == "3.00 ± 1.58");
}

TEST_CASE("fold aggregation groups by field and metric") {
  MetricReport t1{"T_tilde", 1.0, 2.0, 0.1, 0.2, std::nullopt, std::nullopt, 3};
  MetricReport t2{"T_tilde", 3.0, 4.0, 0.3, 0.4, std::nullopt, std::nullopt, 3};
  MetricReport f1{"f_l", 0.5, 0.5, 0.5, 0.5, 0.8, 0.1, 3};
  MetricReport f2{"f_l", 0.5, 0.5, 0.5, 0.5, 0.6, 0.1, 3};
  const auto agg = fold_aggregate({{t1, f1}, {t2, f2}});
  CHECK(agg.at("T_tilde").at("mae").mean == 2.0);
  CHECK(agg.at("T_tilde").at("rel_rmse").max == 0.4);
  CHECK(agg.at("f_l").at("iou").mean == doctest::Approx(0.7));
  CHECK(agg.at("T_tilde").count("iou") == 0);
}

TEST_CASE("report CSV layout") {
  MetricReport t{"T_tilde", 1.0, 2.0, 0.1, 0.2, std::nullopt, std::nullopt, 3};
  std::ostringstream os;
  write_report_csv(os, "classical", 0, {t}, true);
  const auto text = os.str();
  CHECK(text.rfind("model,fold,field,metric,value\n", 0) == 0);
  CHECK(text.find("classical,0,T_tilde,mae,1") != std::string::npos);
}
