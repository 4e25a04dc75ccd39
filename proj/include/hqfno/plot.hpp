#pragma once

// Minimal SVG charts for the CSV artifacts. No metrics are computed here.

#include <map>
#include <string>
#include <vector>

namespace hqfno::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

/// Points (x, y, value) on a regular or scattered layout, colored by value.
struct HeatChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> value;
};

std::string render_svg(const LineChart& chart);
std::string render_svg(const HeatChart& chart);

/// Simple CSV table: header names and rows of raw cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
  std::vector<double> numeric(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

/// Picks a chart for a known CSV schema (training log, shot study, C_q sweep,
/// per-point metrics) and renders it. Throws DataError on unknown schemas.
std::string render_csv(const CsvTable& table, const std::string& title);

}  // namespace hqfno::plot
