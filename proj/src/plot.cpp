#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "artifact_io.hpp"
#include "resample_es/experiment.hpp"

namespace resample_es {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct LabeledCurve {
  int y = 0;
  AggregateCurve curve{};
};

// One row per distinct evaluation count across all curves; each column
// carries its curve's last value at or before the row's abscissa and stays
// blank before the curve's first point.
std::string table_csv(const std::vector<LabeledCurve>& curves) {
  std::vector<double> grid;
  for (const LabeledCurve& lc : curves) {
    grid.insert(grid.end(), lc.curve.abscissa.begin(),
                lc.curve.abscissa.end());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<std::vector<std::string>> columns(curves.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const AggregateCurve& curve = curves[c].curve;
    columns[c].resize(grid.size());
    std::size_t k = 0;
    std::string current;
    bool seen = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      while (k < curve.abscissa.size() && curve.abscissa[k] <= grid[i]) {
        current = format_double(curve.ordinate[k]);
        seen = true;
        ++k;
      }
      if (seen) columns[c][i] = current;
    }
  }

  std::ostringstream out;
  out << "evals";
  for (const LabeledCurve& lc : curves) out << ",Y=" << lc.y;
  out << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_double(grid[i]);
    for (std::size_t c = 0; c < curves.size(); ++c) {
      out << "," << columns[c][i];
    }
    out << "\n";
  }
  return out.str();
}

// Minimal self-contained line chart: light grid, one polyline per curve,
// legend on the right. Non-finite ordinates break the polyline.
std::string render_svg(const std::string& title,
                       const std::vector<LabeledCurve>& curves) {
  constexpr double kWidth = 900.0;
  constexpr double kHeight = 560.0;
  constexpr double kLeft = 80.0;
  constexpr double kRight = 150.0;
  constexpr double kTop = 48.0;
  constexpr double kBottom = 56.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                   "#d62728", "#9467bd", "#8c564b",
                                   "#e377c2", "#7f7f7f"};
  constexpr std::size_t kPaletteSize = 8;

  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  bool any = false;
  for (const LabeledCurve& lc : curves) {
    for (std::size_t i = 0; i < lc.curve.abscissa.size(); ++i) {
      const double y = lc.curve.ordinate[i];
      if (!std::isfinite(y)) continue;
      const double x = lc.curve.abscissa[i];
      if (!any) {
        x_min = x_max = x;
        y_min = y_max = y;
        any = true;
      } else {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;

  const auto px = [&](double x) {
    return kLeft + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto py = [&](double y) {
    return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2.0
      << "\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"17\" fill=\"#111\">"
      << title << "</text>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / kTicks;
    const double gx = px(fx);
    out << "<line x1=\"" << gx << "\" y1=\"" << kTop << "\" x2=\"" << gx
        << "\" y2=\"" << kTop + plot_h
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << gx << "\" y=\"" << kTop + plot_h + 20.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" fill=\"#333\">"
        << format_tick(fx) << "</text>\n";
    const double fy = y_min + (y_max - y_min) * i / kTicks;
    const double gy = py(fy);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << gy << "\" x2=\""
        << kLeft + plot_w << "\" y2=\"" << gy
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kLeft - 8.0 << "\" y=\"" << gy + 4.0
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\" fill=\"#333\">"
        << format_tick(fy) << "</text>\n";
  }
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << kLeft + plot_w / 2.0 << "\" y=\"" << kHeight - 14.0
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" fill=\"#111\">evaluations</text>\n";
  out << "<text x=\"20\" y=\"" << kTop + plot_h / 2.0
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" fill=\"#111\" transform=\"rotate(-90 20 "
      << kTop + plot_h / 2.0 << ")\">log distance</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % kPaletteSize];
    const AggregateCurve& curve = curves[c].curve;
    std::ostringstream points;
    bool open = false;
    const auto flush = [&] {
      if (open) {
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"" << points.str()
            << "\"/>\n";
      }
      points.str("");
      open = false;
    };
    for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
      const double y = curve.ordinate[i];
      if (!std::isfinite(y)) {
        flush();
        continue;
      }
      if (open) points << " ";
      points << format_tick(px(curve.abscissa[i])) << ","
             << format_tick(py(y));
      open = true;
    }
    flush();
    const double ly = kTop + 10.0 + 20.0 * static_cast<double>(c);
    const double lx = kLeft + plot_w + 16.0;
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24.0
        << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << lx + 30.0 << "\" y=\"" << ly + 4.0
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\"#111\">Y=" << curves[c].y << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

void emit_plot_data(const std::filesystem::path& dir) {
  json manifest = detail::load_manifest(dir);
  const detail::TraceSet set = detail::load_traces(dir, manifest);
  if (set.by_y.empty()) {
    throw TraceError("manifest lists no traces: " +
                     (dir / detail::kManifestName).string());
  }

  json files = json::array();
  for (const json& entry : manifest.at("files")) {
    if (entry.value("kind", "") != "plot") files.push_back(entry);
  }

  for (const Statistic statistic : {Statistic::median, Statistic::mean}) {
    std::vector<LabeledCurve> curves;
    for (const auto& [y, traces] : set.by_y) {
      curves.push_back({y, aggregate_runs(traces, statistic)});
    }
    const std::string stat_name = to_string(statistic);
    const std::string csv = table_csv(curves);
    const std::string csv_name = "plot_" + stat_name + ".csv";
    write_text_file(dir / csv_name, csv);
    files.push_back(detail::file_entry(csv_name, "plot", csv));

    const std::string svg = render_svg(
        (statistic == Statistic::median ? std::string("Median")
                                        : std::string("Mean")) +
            " log-distance vs evaluations",
        curves);
    const std::string svg_name = "plot_" + stat_name + ".svg";
    write_text_file(dir / svg_name, svg);
    files.push_back(detail::file_entry(svg_name, "plot", svg));
  }

  manifest["files"] = files;
  detail::write_manifest(dir, manifest);
}

}  // namespace resample_es
