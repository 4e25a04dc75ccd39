#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace hqfno::metrics {

struct ErrorPair {
  double mae = 0.0;
  double rmse = 0.0;
};

/// Throws DomainError on empty input, ShapeError on a size mismatch.
ErrorPair field_errors(std::span<const double> pred, std::span<const double> ref);

struct RelativeErrors {
  double rel_mae = 0.0;
  double rel_rmse = 0.0;
};

/// mae / (mu + eps), rmse / (mu + eps); mu is the evaluation-set mean.
RelativeErrors relative_errors(double mae, double rmse, double mu, double eps = 1e-8);

/// Streams many samples into one set-level MAE/RMSE/mean(ref).
class ErrorAccumulator {
 public:
  void add(std::span<const double> pred, std::span<const double> ref);
  std::size_t count() const { return count_; }
  double mae() const;
  double rmse() const;
  double mean_ref() const;

 private:
  double sum_abs_ = 0.0;
  double sum_sq_ = 0.0;
  double sum_ref_ = 0.0;
  std::size_t count_ = 0;
};

/// |{p > tau} & {r > tau}| / |{p > tau} | {r > tau}|; an empty union gives 1.
double iou(std::span<const double> pred, std::span<const double> ref, double tau = 0.5);

struct MetricReport {
  std::string field_name;
  double mae = 0.0;
  double rmse = 0.0;
  double rel_mae = 0.0;
  double rel_rmse = 0.0;
  std::optional<double> iou_mean;
  std::optional<double> iou_std;
  std::size_t n_samples = 0;
};

struct FoldStats {
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  std::vector<double> values;
};

FoldStats fold_stats(std::span<const double> values);

/// Per field, per metric ("mae", "rmse", "rel_mae", "rel_rmse", "iou") stats
/// over folds. Each fold contributes one report per field.
std::map<std::string, std::map<std::string, FoldStats>> fold_aggregate(
    const std::vector<std::vector<MetricReport>>& folds);

/// "mean [min, max]" as in per-fold range tables.
std::string format_mean_range(const FoldStats& s, int precision = 3);
/// "mean ± std".
std::string format_mean_std(const FoldStats& s, int precision = 3);

/// Long-format CSV: model,fold,field,metric,value.
void write_report_csv(std::ostream& out, const std::string& model, int fold,
                      const std::vector<MetricReport>& reports, bool header);

}  // namespace hqfno::metrics
