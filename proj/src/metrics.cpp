#include "rac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace rac {

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return "0";  // unreachable
}

namespace {

std::size_t count_cols(const std::string& header) {
  return static_cast<std::size_t>(std::count(header.begin(), header.end(),
                                             ',')) +
         1;
}

}  // namespace

CsvLog::CsvLog(const std::string& path, const std::string& header) {
  open(path, header);
}

void CsvLog::open(const std::string& path, const std::string& header) {
  path_ = path;
  n_cols_ = count_cols(header);
  out_.open(path, std::ios::trunc);
  if (!out_) throw CsvError(path + ": cannot open for writing");
  out_ << header << '\n';
  out_.flush();
}

void CsvLog::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_cols_)
    throw CsvError(path_ + ": row with " + std::to_string(cells.size()) +
                   " cells against a " + std::to_string(n_cols_) +
                   "-column header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvLog::flush() { out_.flush(); }

std::size_t CsvTable::col(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw CsvError(path + ": no column named '" + name + "'");
}

const std::string& CsvTable::cell(std::size_t row, std::size_t column) const {
  return rows.at(row).at(column);
}

double CsvTable::num(std::size_t row, std::size_t column) const {
  const std::string& s = cell(row, column);
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size() || s.empty())
    throw CsvError(path + ": row " + std::to_string(row + 2) + " column '" +
                   header.at(column) + "': not a number: '" + s + "'");
  return v;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CsvError(path + ": cannot open");
  CsvTable t;
  t.path = path;
  std::string line;
  if (!std::getline(f, line) || line.empty())
    throw CsvError(path + ": missing header line");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    if (line.back() == ',') t.header.push_back("");
  }
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty())
      throw CsvError(path + ": line " + std::to_string(line_no) + ": empty row");
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != t.header.size())
      throw CsvError(path + ": line " + std::to_string(line_no) + ": " +
                     std::to_string(cells.size()) + " cells against a " +
                     std::to_string(t.header.size()) + "-column header");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::string eval_header(int grid) {
  std::string h = "step,beta_star,score";
  for (int i = 1; i <= grid; ++i) h += ",ret_" + std::to_string(i);
  return h;
}

}  // namespace rac
