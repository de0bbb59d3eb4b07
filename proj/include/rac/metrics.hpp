#ifndef RAC_METRICS_HPP
#define RAC_METRICS_HPP

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rac {

// CSV parse failure; what() carries path, line and cell context.
struct CsvError : std::runtime_error {
  explicit CsvError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shortest decimal that round-trips to the same double; "nan" for NaN.
std::string csv_double(double v);

// Append-only CSV writer. The header is written when the file is created;
// rows go out line-at-a-time and flush() pushes complete rows to the OS, so
// a killed run leaves a file that ends on a row boundary and still parses.
class CsvLog {
 public:
  CsvLog() = default;
  CsvLog(const std::string& path, const std::string& header);

  void open(const std::string& path, const std::string& header);
  bool is_open() const { return out_.is_open(); }
  const std::string& path() const { return path_; }

  // Cells are written as given; the count must match the header.
  void row(const std::vector<std::string>& cells);
  void flush();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t n_cols_ = 0;
};

// Fully parsed CSV: a header and string cells, with checked numeric access.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws CsvError if absent.
  std::size_t col(const std::string& name) const;
  const std::string& cell(std::size_t row, std::size_t column) const;
  // Numeric view of a cell; throws CsvError naming the offending cell.
  double num(std::size_t row, std::size_t column) const;
};

// Strict reader: every row must match the header's arity and the file must
// be non-empty. Throws CsvError describing the first problem found.
CsvTable read_csv(const std::string& path);

// Artifact schema identifiers recorded in run manifests.
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kTrainHeader = "step,seed,metric,value";
inline constexpr const char* kBiasHeader = "step,bias_mean,bias_std";
inline constexpr const char* kAggregateHeader = "step,mean,std,seeds";

// eval.csv columns: step,beta_star,score,ret_1..ret_<grid>.
std::string eval_header(int grid);

}  // namespace rac

#endif
