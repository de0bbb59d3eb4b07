#ifndef RAC_PLOT_HPP
#define RAC_PLOT_HPP

#include <string>
#include <vector>

#include "rac/metrics.hpp"

namespace rac {

// One labeled curve: per-x mean with a +-1 std band (std may be all zero,
// which renders as a zero-width band).
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;
};

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Exact data extrema: x over all points, y over the mean +- std envelope.
// Axis bounds equal these values; nothing is padded or rounded away.
AxisRange x_range(const std::vector<PlotSeries>& series);
AxisRange y_range(const std::vector<PlotSeries>& series);

// Standalone SVG with one band + mean line per series, axis end labels at
// the exact extrema and a legend naming every series.
std::string render_band_chart(const std::string& title,
                              const std::string& xlabel,
                              const std::string& ylabel,
                              const std::vector<PlotSeries>& series);
void write_band_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<PlotSeries>& series);

// Mean/std across seeds of a per-seed numeric column, joined on exact
// `step` values present in every table. Tables must share the schema.
PlotSeries aggregate_column(const std::string& label,
                            const std::vector<CsvTable>& per_seed,
                            const std::string& column);

// Same over long-format train tables (step,seed,metric,value): one series
// per metric name, keeping steps where every table has a finite value.
PlotSeries aggregate_metric(const std::string& label,
                            const std::vector<CsvTable>& per_seed,
                            const std::string& metric);

// Shell-style filename expansion (POSIX glob), sorted; empty if no match.
std::vector<std::string> expand_glob(const std::string& pattern);

}  // namespace rac

#endif
