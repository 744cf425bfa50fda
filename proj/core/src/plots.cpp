#include "hetnet/plots.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <cstdio>
#include <fstream>
#include <limits>

#include "hetnet/errors.hpp"

namespace hetnet {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 200.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

}  // namespace

std::string render_svg(const ResultTable& table, const std::string& channel_model,
                       PlotMetric metric) {
  const bool log_axis = metric == PlotMetric::kBer;
  std::vector<Series> series;
  for (const auto& row : table.rows) {
    if (row.channel_model != channel_model) continue;
    const double y = log_axis ? row.ber_mean : row.sum_rate_mean;
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const Series& s) { return s.name == row.algorithm; });
    if (it == series.end()) {
      series.push_back({row.algorithm, {}});
      it = series.end() - 1;
    }
    if (!std::isfinite(y) || (log_axis && y <= 0.0)) continue;
    it->points.emplace_back(row.snr_eff_db, log_axis ? std::log10(y) : y);
  }

  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = log_axis ? -6.0 : 0.0;
    y1 = log_axis ? 0.0 : 1.0;
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  double ystep = 1.0;
  if (log_axis) {
    y0 = std::floor(y0);
    y1 = std::max(std::ceil(y1), y0 + 1.0);
  } else {
    y0 = 0.0;
    if (y1 <= y0) y1 = 1.0;
    ystep = nice_step(y1 - y0);
    y1 = std::ceil(y1 / ystep) * ystep;
  }
  const double xstep = nice_step(x1 - x0);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title = std::string(log_axis ? "Raw BER" : "Sum rate") + " (" + channel_model + ")";
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         title + "</text>\n";

  for (double x = std::ceil(x0 / xstep) * xstep; x <= x1 + 1e-9; x += xstep) {
    svg += "<line x1=\"" + num(px(x)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(px(x)) +
           "\" y2=\"" + num(kTop + ph) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + num(px(x)) + "\" y=\"" + num(kTop + ph + 18) +
           "\" text-anchor=\"middle\">" + label(x) + "</text>\n";
  }
  for (double y = y0; y <= y1 + 1e-9; y += ystep) {
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(y)) + "\" x2=\"" + num(kLeft + pw) +
           "\" y2=\"" + num(py(y)) + "\" stroke=\"#dddddd\"/>\n";
    const std::string text = log_axis ? "1e" + label(y) : label(y);
    svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py(y) + 4) +
           "\" text-anchor=\"end\">" + text + "</text>\n";
  }
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 15) +
         "\" text-anchor=\"middle\">Effective transmit SNR of picocells (dB)</text>\n";
  svg += "<text transform=\"translate(18 " + num(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" +
         std::string(log_axis ? "Bit error rate" : "Sum rate (bits/s/Hz)") + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::string color = kPalette[k % std::size(kPalette)];
    const auto& s = series[k];
    if (!s.points.empty()) {
      std::string pts;
      for (const auto& [x, y] : s.points) pts += num(px(x)) + "," + num(py(y)) + " ";
      pts.pop_back();
      svg += "<polyline class=\"curve\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
      for (const auto& [x, y] : s.points) {
        svg += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"3\" fill=\"" +
               color + "\"/>\n";
      }
    }
    const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
    const double lx = kLeft + pw + 15;
    svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 24) +
           "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text class=\"legend\" x=\"" + num(lx + 30) + "\" y=\"" + num(ly + 4) + "\">" +
           s.name + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> emit_plots(const ResultTable& table,
                                              const std::filesystem::path& output_dir,
                                              const std::string& config_hash,
                                              const std::string& timestamp) {
  if (table.rows.empty()) throw PreconditionViolation("emit_plots: result table is empty");
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create " + output_dir.string() + ": " + ec.message());

  std::vector<std::string> models;
  for (const auto& row : table.rows) {
    if (std::find(models.begin(), models.end(), row.channel_model) == models.end()) {
      models.push_back(row.channel_model);
    }
  }
  const std::string suffix = "_" + config_hash + "_" + timestamp;
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  for (const auto& model : models) {
    files.emplace_back(output_dir / ("sum_rate_" + model + suffix + ".svg"),
                       render_svg(table, model, PlotMetric::kSumRate));
    files.emplace_back(output_dir / ("ber_" + model + suffix + ".svg"),
                       render_svg(table, model, PlotMetric::kBer));
  }
  files.emplace_back(output_dir / ("table" + suffix + ".csv"), table_to_csv(table));

  std::vector<std::filesystem::path> written;
  for (const auto& [path, content] : files) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << content;
    if (!out) throw IoError("cannot write " + path.string());
    written.push_back(path);
  }
  return written;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &utc);
  return buf;
}

}  // namespace hetnet
