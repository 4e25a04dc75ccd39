#include "hqfno/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "hqfno/errors.hpp"

namespace hqfno::plot {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    const double t = log ? std::log10(v) : v;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

void frame(std::ostringstream& os, const std::string& title, const std::string& xl,
           const std::string& yl, const Axis& ax, const Axis& ay) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double vx = ax.lo + f * (ax.hi - ax.lo);
    const double vy = ay.lo + f * (ay.hi - ay.lo);
    const double px = kLeft + f * pw;
    const double py = kTop + ph - f * ph;
    os << "<text x=\"" << px << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
       << num(ax.log ? std::pow(10.0, vx) : vx) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
       << num(ay.log ? std::pow(10.0, vy) : vy) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(yl) << "</text>\n";
}

// Blue to red through white.
std::string color_for(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = static_cast<int>(59 + s * (255 - 59));
    g = static_cast<int>(76 + s * (255 - 76));
    b = static_cast<int>(192 + s * (255 - 192));
  } else {
    const double s = (t - 0.5) / 0.5;
    r = static_cast<int>(255 - s * (255 - 180));
    g = static_cast<int>(255 - s * (255 - 4));
    b = static_cast<int>(255 - s * (255 - 38));
  }
  std::ostringstream os;
  os << "rgb(" << r << "," << g << "," << b << ")";
  return os.str();
}

}  // namespace

std::string render_svg(const LineChart& chart) {
  std::vector<double> xs, ys;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw ShapeError("series '" + s.label + "' x/y lengths differ");
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = make_axis(xs, chart.log_x);
  const Axis ay = make_axis(ys, chart.log_y);
  std::ostringstream os;
  os << std::setprecision(6);
  frame(os, chart.title, chart.x_label, chart.y_label, ax, ay);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if ((chart.log_x && s.x[i] <= 0.0) || (chart.log_y && s.y[i] <= 0.0)) continue;
      os << kLeft + ax.map(s.x[i]) * pw << "," << kTop + ph - ay.map(s.y[i]) * ph << " ";
    }
    os << "\"/>\n";
    const double ly = kTop + 12 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly << "\" x2=\""
       << kWidth - kRight + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 34 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_svg(const HeatChart& chart) {
  if (chart.x.size() != chart.y.size() || chart.x.size() != chart.value.size()) {
    throw ShapeError("heat chart columns differ in length");
  }
  const Axis ax = make_axis(chart.x, false);
  const Axis ay = make_axis(chart.y, false);
  const Axis av = make_axis(chart.value, false);
  std::ostringstream os;
  os << std::setprecision(6);
  frame(os, chart.title, chart.x_label, chart.y_label, ax, ay);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  for (std::size_t i = 0; i < chart.x.size(); ++i) {
    os << "<circle cx=\"" << kLeft + ax.map(chart.x[i]) * pw << "\" cy=\""
       << kTop + ph - ay.map(chart.y[i]) * ph << "\" r=\"6\" fill=\""
       << color_for(av.map(chart.value[i])) << "\" stroke=\"#333\" stroke-width=\"0.5\"/>\n";
  }
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    os << "<rect x=\"" << kWidth - kRight + 20 << "\" y=\"" << kTop + ph - (t + 0.1) * ph * 0.9
       << "\" width=\"16\" height=\"" << ph * 0.09 + 1 << "\" fill=\"" << color_for(t) << "\"/>\n";
  }
  os << "<text x=\"" << kWidth - kRight + 40 << "\" y=\"" << kTop + 10 << "\">"
     << num(av.hi) << "</text>\n";
  os << "<text x=\"" << kWidth - kRight + 40 << "\" y=\"" << kTop + ph << "\">" << num(av.lo)
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw DataError("CSV has no column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const auto& cell = r.at(static_cast<std::size_t>(c));
    out.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell));
  }
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw DataError(path + " is empty");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw DataError("ragged row in " + path);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

namespace {

// One series per distinct value of `key`, in first-seen order.
std::vector<Series> grouped(const CsvTable& table, const std::string& key, const std::string& x,
                            const std::string& y) {
  const auto k = table.numeric(key);
  const auto xs = table.numeric(x);
  const auto ys = table.numeric(y);
  std::vector<Series> out;
  std::map<double, std::size_t> slot;
  for (std::size_t i = 0; i < k.size(); ++i) {
    auto [it, fresh] = slot.try_emplace(k[i], out.size());
    if (fresh) {
      std::ostringstream name;
      name << key << " " << k[i];
      out.push_back({name.str(), {}, {}});
    }
    out[it->second].x.push_back(xs[i]);
    out[it->second].y.push_back(ys[i]);
  }
  return out;
}

}  // namespace

std::string render_csv(const CsvTable& table, const std::string& title) {
  if (table.column("loss_total") >= 0) {
    LineChart c{title, "step", "loss", false, true, {}};
    const auto step = table.numeric("step");
    for (const char* name : {"loss_t", "loss_alpha", "loss_total"}) {
      c.series.push_back({name, step, table.numeric(name)});
    }
    return render_svg(c);
  }
  if (table.column("shots") >= 0 && table.column("mse") >= 0) {
    // Mean over repeats per shot count.
    const auto shots = table.numeric("shots");
    const auto mse = table.numeric("mse");
    std::map<double, std::pair<double, int>> acc;
    for (std::size_t i = 0; i < shots.size(); ++i) {
      acc[shots[i]].first += mse[i];
      acc[shots[i]].second += 1;
    }
    Series s{"mean MSE", {}, {}};
    for (const auto& [k, v] : acc) {
      s.x.push_back(k);
      s.y.push_back(v.first / v.second);
    }
    return render_svg(LineChart{title, "shots", "MSE", true, true, {s}});
  }
  if (table.column("c_q") >= 0) {
    const auto cq = table.numeric("c_q");
    LineChart c{title, "C_q", "value", false, false, {}};
    for (const char* name : {"rel_mae_t_mean", "rel_rmse_t_mean", "iou_fl_mean"}) {
      if (table.column(name) >= 0) c.series.push_back({name, cq, table.numeric(name)});
    }
    if (c.series.empty()) throw DataError("C_q sweep CSV has no metric columns");
    return render_svg(c);
  }
  if (table.column("eigenvalue") >= 0 && table.column("depth") >= 0) {
    return render_svg(LineChart{title, "index", "eigenvalue", false, true,
                                grouped(table, "depth", "index", "eigenvalue")});
  }
  if (table.column("frequency") >= 0 && table.column("encodings") >= 0) {
    return render_svg(LineChart{title, "frequency", "|c_w|", false, false,
                                grouped(table, "encodings", "frequency", "magnitude")});
  }
  if (table.column("h_star") >= 0 && table.column("power") >= 0) {
    const int vc = table.column("rel_mae_t") >= 0 ? table.column("rel_mae_t")
                                                   : static_cast<int>(table.header.size()) - 1;
    return render_svg(HeatChart{title, "H*", "P (W)", table.numeric("h_star"),
                                table.numeric("power"),
                                table.numeric(table.header[static_cast<std::size_t>(vc)])});
  }
  throw DataError("unrecognized CSV schema for plotting");
}

}  // namespace hqfno::plot
