#include "rac/plot.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rac/distributions.hpp"

namespace rac {
namespace {

constexpr double kW = 860, kH = 540;
constexpr double kMarginL = 90, kMarginR = 30, kMarginT = 50, kMarginB = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

void check_series(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw std::invalid_argument("plot: no series");
  for (const PlotSeries& s : series) {
    if (s.x.empty()) throw std::invalid_argument("plot: empty series '" +
                                                 s.label + "'");
    if (s.x.size() != s.mean.size() || s.x.size() != s.std.size())
      throw std::invalid_argument("plot: ragged series '" + s.label + "'");
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.mean[i]) ||
          !std::isfinite(s.std[i]))
        throw std::invalid_argument("plot: non-finite point in series '" +
                                    s.label + "'");
  }
}

}  // namespace

AxisRange x_range(const std::vector<PlotSeries>& series) {
  check_series(series);
  AxisRange r{series[0].x[0], series[0].x[0]};
  for (const PlotSeries& s : series)
    for (double v : s.x) {
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
    }
  return r;
}

AxisRange y_range(const std::vector<PlotSeries>& series) {
  check_series(series);
  AxisRange r{series[0].mean[0] - series[0].std[0],
              series[0].mean[0] - series[0].std[0]};
  for (const PlotSeries& s : series)
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      r.lo = std::min(r.lo, s.mean[i] - s.std[i]);
      r.hi = std::max(r.hi, s.mean[i] + s.std[i]);
    }
  return r;
}

std::string render_band_chart(const std::string& title,
                              const std::string& xlabel,
                              const std::string& ylabel,
                              const std::vector<PlotSeries>& series) {
  check_series(series);
  const AxisRange xr = x_range(series), yr = y_range(series);
  const double pw = kW - kMarginL - kMarginR;
  const double ph = kH - kMarginT - kMarginB;
  auto sx = [&](double v) {
    double t = xr.hi > xr.lo ? (v - xr.lo) / (xr.hi - xr.lo) : 0.5;
    return kMarginL + t * pw;
  };
  auto sy = [&](double v) {
    double t = yr.hi > yr.lo ? (v - yr.lo) / (yr.hi - yr.lo) : 0.5;
    return kMarginT + (1.0 - t) * ph;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
     << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
     << "\" font-family=\"sans-serif\">\n";
  // The exact axis bounds travel with the image so tools (and tests) can
  // recover the data extents without re-parsing coordinates.
  os << "<!-- x-range [" << csv_double(xr.lo) << "," << csv_double(xr.hi)
     << "] y-range [" << csv_double(yr.lo) << "," << csv_double(yr.hi)
     << "] -->\n";
  os << "<rect width=\"" << kW << "\" height=\"" << kH
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"28\" text-anchor=\"middle\" "
        "font-size=\"17\">"
     << xml_escape(title) << "</text>\n";

  // frame
  os << "<rect x=\"" << px(kMarginL) << "\" y=\"" << px(kMarginT)
     << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
     << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    // band: upper edge left-to-right, lower edge back
    os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.22\" "
       << "stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << px(sx(s.x[i])) << "," << px(sy(s.mean[i] + s.std[i])) << " ";
    for (std::size_t i = s.x.size(); i-- > 0;)
      os << px(sx(s.x[i])) << "," << px(sy(s.mean[i] - s.std[i]))
         << (i ? " " : "");
    os << "\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << px(sx(s.x[i])) << "," << px(sy(s.mean[i]))
         << (i + 1 < s.x.size() ? " " : "");
    os << "\"/>\n";
    // legend entry
    double ly = kMarginT + 16 + 20 * static_cast<double>(si);
    os << "<rect x=\"" << px(kMarginL + 10) << "\" y=\"" << px(ly - 9)
       << "\" width=\"14\" height=\"10\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << px(kMarginL + 30) << "\" y=\"" << px(ly)
       << "\" font-size=\"13\">" << xml_escape(s.label) << "</text>\n";
  }

  // axis end labels carry the exact extrema
  os << "<text x=\"" << px(kMarginL) << "\" y=\"" << px(kH - kMarginB + 18)
     << "\" font-size=\"12\" text-anchor=\"middle\">" << csv_double(xr.lo)
     << "</text>\n";
  os << "<text x=\"" << px(kW - kMarginR) << "\" y=\""
     << px(kH - kMarginB + 18) << "\" font-size=\"12\" text-anchor=\"middle\">"
     << csv_double(xr.hi) << "</text>\n";
  os << "<text x=\"" << px(kMarginL - 8) << "\" y=\"" << px(kH - kMarginB)
     << "\" font-size=\"12\" text-anchor=\"end\">" << csv_double(yr.lo)
     << "</text>\n";
  os << "<text x=\"" << px(kMarginL - 8) << "\" y=\"" << px(kMarginT + 4)
     << "\" font-size=\"12\" text-anchor=\"end\">" << csv_double(yr.hi)
     << "</text>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"" << px(kH - 16)
     << "\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(xlabel)
     << "</text>\n";
  os << "<text x=\"20\" y=\"" << kH / 2
     << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
     << kH / 2 << ")\">" << xml_escape(ylabel) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_band_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<PlotSeries>& series) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f << render_band_chart(title, xlabel, ylabel, series);
  if (!f.flush()) throw std::runtime_error(path + ": write failed");
}

namespace {

// Keep steps that every seed reported a finite value for; one seed gives a
// zero-width band.
void append_joined(PlotSeries& out,
                   const std::map<long, std::vector<double>>& by_step,
                   std::size_t n_seeds) {
  for (const auto& [step, vals] : by_step) {
    if (vals.size() != n_seeds) continue;
    bool finite = true;
    for (double v : vals) finite = finite && std::isfinite(v);
    if (!finite) continue;
    double mean = vals[0], sd = 0.0;
    if (vals.size() > 1) {
      VectorXd v = Eigen::Map<const VectorXd>(
          vals.data(), static_cast<Eigen::Index>(vals.size()));
      MeanStd ms = ensemble_mean_std(v);
      mean = ms.mean;
      sd = ms.std;
    }
    out.x.push_back(static_cast<double>(step));
    out.mean.push_back(mean);
    out.std.push_back(sd);
  }
}

}  // namespace

PlotSeries aggregate_column(const std::string& label,
                            const std::vector<CsvTable>& per_seed,
                            const std::string& column) {
  PlotSeries out;
  out.label = label;
  if (per_seed.empty()) return out;
  // step -> per-seed values, joined on steps present everywhere
  std::map<long, std::vector<double>> by_step;
  for (const CsvTable& t : per_seed) {
    std::size_t sc = t.col("step"), vc = t.col(column);
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      by_step[static_cast<long>(t.num(r, sc))].push_back(t.num(r, vc));
  }
  append_joined(out, by_step, per_seed.size());
  return out;
}

PlotSeries aggregate_metric(const std::string& label,
                            const std::vector<CsvTable>& per_seed,
                            const std::string& metric) {
  PlotSeries out;
  out.label = label;
  if (per_seed.empty()) return out;
  std::map<long, std::vector<double>> by_step;
  for (const CsvTable& t : per_seed) {
    std::size_t sc = t.col("step"), mc = t.col("metric"), vc = t.col("value");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (t.cell(r, mc) != metric) continue;
      double v = t.num(r, vc);
      if (!std::isfinite(v)) continue;
      by_step[static_cast<long>(t.num(r, sc))].push_back(v);
    }
  }
  append_joined(out, by_step, per_seed.size());
  return out;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g;
  std::vector<std::string> out;
  int rc = ::glob(pattern.c_str(), GLOB_TILDE, nullptr, &g);
  if (rc == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i)
      out.emplace_back(g.gl_pathv[i]);
  ::globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rac
