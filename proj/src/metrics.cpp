#include "hqfno/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "hqfno/errors.hpp"

namespace hqfno::metrics {

ErrorPair field_errors(std::span<const double> pred, std::span<const double> ref) {
  ErrorAccumulator acc;
  acc.add(pred, ref);
  return {acc.mae(), acc.rmse()};
}

RelativeErrors relative_errors(double mae, double rmse, double mu, double eps) {
  return {mae / (mu + eps), rmse / (mu + eps)};
}

void ErrorAccumulator::add(std::span<const double> pred, std::span<const double> ref) {
  if (pred.size() != ref.size()) throw ShapeError("prediction and reference sizes differ");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - ref[i];
    sum_abs_ += std::abs(e);
    sum_sq_ += e * e;
    sum_ref_ += ref[i];
  }
  count_ += pred.size();
}

double ErrorAccumulator::mae() const {
  if (count_ == 0) throw DomainError("error metrics of an empty set");
  return sum_abs_ / static_cast<double>(count_);
}

double ErrorAccumulator::rmse() const {
  if (count_ == 0) throw DomainError("error metrics of an empty set");
  return std::sqrt(sum_sq_ / static_cast<double>(count_));
}

double ErrorAccumulator::mean_ref() const {
  if (count_ == 0) throw DomainError("error metrics of an empty set");
  return sum_ref_ / static_cast<double>(count_);
}

double iou(std::span<const double> pred, std::span<const double> ref, double tau) {
  if (pred.size() != ref.size()) throw ShapeError("prediction and reference sizes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred[i] > tau;
    const bool b = ref[i] > tau;
    inter += (a && b);
    uni += (a || b);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

FoldStats fold_stats(std::span<const double> values) {
  if (values.empty()) throw DomainError("fold statistics need at least one fold");
  FoldStats s;
  s.values.assign(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

std::map<std::string, std::map<std::string, FoldStats>> fold_aggregate(
    const std::vector<std::vector<MetricReport>>& folds) {
  if (folds.empty()) throw DomainError("fold aggregation needs at least one fold");
  std::map<std::string, std::map<std::string, std::vector<double>>> raw;
  for (const auto& fold : folds) {
    for (const auto& r : fold) {
      auto& m = raw[r.field_name];
      m["mae"].push_back(r.mae);
      m["rmse"].push_back(r.rmse);
      m["rel_mae"].push_back(r.rel_mae);
      m["rel_rmse"].push_back(r.rel_rmse);
      if (r.iou_mean) m["iou"].push_back(*r.iou_mean);
    }
  }
  std::map<std::string, std::map<std::string, FoldStats>> out;
  for (const auto& [field, metrics] : raw) {
    for (const auto& [name, values] : metrics) out[field][name] = fold_stats(values);
  }
  return out;
}

std::string format_mean_range(const FoldStats& s, int precision) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(precision) << s.mean << " [" << s.min << ", " << s.max
    << "]";
  return o.str();
}

std::string format_mean_std(const FoldStats& s, int precision) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(precision) << s.mean << " ± " << s.std;
  return o.str();
}

void write_report_csv(std::ostream& out, const std::string& model, int fold,
                      const std::vector<MetricReport>& reports, bool header) {
  if (header) out << "model,fold,field,metric,value\n";
  out << std::setprecision(10);
  for (const auto& r : reports) {
    auto row = [&](const char* metric, double v) {
      out << model << "," << fold << "," << r.field_name << "," << metric << "," << v << "\n";
    };
    row("mae", r.mae);
    row("rmse", r.rmse);
    row("rel_mae", r.rel_mae);
    row("rel_rmse", r.rel_rmse);
    if (r.iou_mean) row("iou_mean", *r.iou_mean);
    if (r.iou_std) row("iou_std", *r.iou_std);
  }
}

}  // namespace hqfno::metrics
