#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rotd/harness.hpp"

namespace rotd {

namespace {

const char* kTraceHeader = "run,seed,iteration,mspbe,l2_residual,dual_value,delta,theta_nnz,"
                           "w_nnz,objective";

double record_metric(const DiagnosticsRecord& rec, const std::string& metric) {
  if (metric == "mspbe") return rec.mspbe;
  if (metric == "l2_residual") return rec.l2_residual;
  if (metric == "dual_value") return rec.dual_value;
  if (metric == "delta") return rec.delta;
  if (metric == "theta_nnz") return rec.theta_nnz;
  if (metric == "w_nnz") return rec.w_nnz;
  if (metric == "objective") return rec.objective;
  throw InvalidArgument("unknown metric '" + metric + "'");
}

std::vector<std::string> split_metrics(const std::string& spec) {
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  if (out.empty()) throw InvalidArgument("no metric given");
  for (const std::string& metric : out) record_metric(DiagnosticsRecord{}, metric);  // validate
  return out;
}

// Mean of a metric across runs at each recorded iteration, skipping diverged
// runs and non-finite values.
PlotSeries mean_series(const std::vector<const RunResult*>& runs, const std::string& metric,
                       const std::string& label) {
  std::map<std::int64_t, std::pair<double, int>> acc;
  for (const RunResult* run : runs) {
    if (run->diverged) continue;
    for (const DiagnosticsRecord& rec : run->records) {
      const double v = record_metric(rec, metric);
      if (!std::isfinite(v)) continue;
      auto& slot = acc[rec.iteration];
      slot.first += v;
      slot.second += 1;
    }
  }
  PlotSeries series;
  series.label = label;
  for (const auto& [iter, slot] : acc) {
    series.x.push_back(static_cast<double>(iter));
    series.y.push_back(slot.first / slot.second);
  }
  return series;
}

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void write_svg(const std::string& path, const std::vector<PlotSeries>& series,
               const std::string& y_label, bool log_y) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  constexpr int kWidth = 860, kHeight = 520;
  constexpr double kLeft = 78, kRight = 660, kTop = 40, kBottom = 470;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double y = s.y[i];
      if (log_y && !(y > 0.0)) continue;
      if (log_y) y = std::log10(y);
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = y;
        first = false;
      } else {
        x_min = std::min(x_min, s.x[i]);
        x_max = std::max(x_max, s.x[i]);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  }
  if (first) throw InvalidArgument("plot has no finite data points");
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) {
    y_max += 0.5;
    y_min -= 0.5;
  }
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft); };
  auto py = [&](double y) {
    const double v = log_y ? std::log10(y) : y;
    return kBottom - (v - y_min) / (y_max - y_min) * (kBottom - kTop);
  };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"13\">\n";

  // axes
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / kTicks;
    out << "<line x1=\"" << px(fx) << "\" y1=\"" << kBottom << "\" x2=\"" << px(fx) << "\" y2=\""
        << kBottom + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(fx) << "\" y=\"" << kBottom + 20
        << "\" text-anchor=\"middle\">" << format_tick(fx) << "</text>\n";
    const double fy = y_min + (y_max - y_min) * i / kTicks;
    const double y_plot = log_y ? std::pow(10.0, fy) : fy;
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(y_plot) << "\" x2=\"" << kLeft
        << "\" y2=\"" << py(y_plot) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(y_plot) + 4
        << "\" text-anchor=\"end\">" << format_tick(y_plot) << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 8
      << "\" text-anchor=\"middle\">iteration</text>\n";
  out << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2 << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 18 " << (kTop + kBottom) / 2 << ")\">" << y_label
      << (log_y ? " (log scale)" : "") << "</text>\n";

  int color = 0;
  double legend_y = kTop + 10;
  for (const PlotSeries& s : series) {
    const char* stroke = kPalette[color % 8];
    std::ostringstream points;
    bool open = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (log_y && !(s.y[i] > 0.0)) continue;
      if (!open) {
        out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.6\" points=\"";
        open = true;
      }
      out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    if (open) out << "\"/>\n";
    out << "<line x1=\"" << kRight + 16 << "\" y1=\"" << legend_y << "\" x2=\"" << kRight + 44
        << "\" y2=\"" << legend_y << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kRight + 50 << "\" y=\"" << legend_y + 4 << "\">" << s.label
        << "</text>\n";
    legend_y += 20;
    ++color;
  }
  out << "</g>\n</svg>\n";
  if (!out) throw IoError("failed writing " + path);
}

void plot_series(const std::vector<PlotSeries>& series, const std::string& metric_spec,
                 const std::string& path, int log_scale) {
  bool any_points = false;
  for (const PlotSeries& s : series) any_points = any_points || !s.x.empty();
  if (!any_points) throw InvalidArgument("refusing to plot an empty series");
  const bool log_default = metric_spec == "mspbe";
  write_svg(path, series, metric_spec, log_scale < 0 ? log_default : log_scale > 0);
}

}  // namespace

void emit_csv(const std::vector<RunResult>& results, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << kTraceHeader << "\n";
  for (const RunResult& run : results) {
    for (const DiagnosticsRecord& rec : run.records) {
      out << run.run_index << ',' << run.seed << ',' << rec.csv_row() << "\n";
    }
  }
  if (!out) throw IoError("failed writing " + path);
}

std::vector<std::string> emit_all_csv(const std::vector<RunResult>& results,
                                      const ExperimentConfig& config, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

  std::vector<std::string> order;
  for (const RunResult& r : results) {
    if (std::find(order.begin(), order.end(), r.label()) == order.end())
      order.push_back(r.label());
  }
  std::vector<std::string> paths;
  for (const std::string& label : order) {
    std::vector<RunResult> group;
    for (const RunResult& r : results) {
      if (r.label() == label) group.push_back(r);
    }
    const std::string path =
        (std::filesystem::path(dir) / (to_string(config.experiment) + "_" + label + ".csv"))
            .string();
    emit_csv(group, path);
    paths.push_back(path);
  }
  return paths;
}

std::vector<std::vector<DiagnosticsRecord>> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trace file " + path);
  // header may carry a trailing \r from foreign tooling
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  if (line != kTraceHeader) throw IoError("unrecognized trace header in " + path);

  std::map<long long, std::vector<DiagnosticsRecord>> by_run;
  std::vector<long long> run_order;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw IoError("ragged row in " + path);
    const long long run = std::stoll(cells[0]);
    DiagnosticsRecord rec;
    rec.iteration = std::stoll(cells[2]);
    rec.mspbe = std::stod(cells[3]);
    rec.l2_residual = std::stod(cells[4]);
    rec.dual_value = std::stod(cells[5]);
    rec.delta = std::stod(cells[6]);
    rec.theta_nnz = static_cast<int>(std::stol(cells[7]));
    rec.w_nnz = static_cast<int>(std::stol(cells[8]));
    rec.objective = std::stod(cells[9]);
    if (by_run.find(run) == by_run.end()) run_order.push_back(run);
    by_run[run].push_back(rec);
  }
  std::vector<std::vector<DiagnosticsRecord>> out;
  for (long long run : run_order) out.push_back(std::move(by_run[run]));
  return out;
}

void emit_plot(const std::vector<RunResult>& results, const std::string& metric,
               const std::string& path, int log_scale) {
  const std::vector<std::string> metrics = split_metrics(metric);
  std::vector<std::string> order;
  for (const RunResult& r : results) {
    if (std::find(order.begin(), order.end(), r.label()) == order.end())
      order.push_back(r.label());
  }
  std::vector<PlotSeries> series;
  for (const std::string& label : order) {
    std::vector<const RunResult*> group;
    for (const RunResult& r : results) {
      if (r.label() == label && !r.diverged) group.push_back(&r);
    }
    int diverged = 0;
    for (const RunResult& r : results) diverged += (r.label() == label && r.diverged) ? 1 : 0;
    for (const std::string& m : metrics) {
      std::string name = metrics.size() > 1 ? label + " " + m : label;
      if (diverged > 0) name += " (" + std::to_string(diverged) + " diverged)";
      PlotSeries s = mean_series(group, m, name);
      if (!s.x.empty()) series.push_back(std::move(s));
    }
  }
  plot_series(series, metric, path, log_scale);
}

void emit_plot_csv(const std::vector<std::string>& csv_paths, const std::string& metric,
                   const std::string& path, int log_scale) {
  const std::vector<std::string> metrics = split_metrics(metric);
  std::vector<PlotSeries> series;
  for (const std::string& csv_path : csv_paths) {
    const auto runs = read_trace_csv(csv_path);
    const std::string stem = std::filesystem::path(csv_path).stem().string();
    for (const std::string& m : metrics) {
      std::map<std::int64_t, std::pair<double, int>> acc;
      for (const auto& records : runs) {
        for (const DiagnosticsRecord& rec : records) {
          const double v = record_metric(rec, m);
          if (!std::isfinite(v)) continue;
          auto& slot = acc[rec.iteration];
          slot.first += v;
          slot.second += 1;
        }
      }
      PlotSeries s;
      s.label = metrics.size() > 1 ? stem + " " + m : stem;
      for (const auto& [iter, slot] : acc) {
        s.x.push_back(static_cast<double>(iter));
        s.y.push_back(slot.first / slot.second);
      }
      if (!s.x.empty()) series.push_back(std::move(s));
    }
  }
  plot_series(series, metric, path, log_scale);
}

}  // namespace rotd
