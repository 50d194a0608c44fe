#include "scca/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "scca/errors.hpp"

namespace scca {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_cell(const std::string& raw, double& out) {
  std::string cell = trimmed(raw);
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace

Mat read_csv(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t n_cols = 0;
  bool saw_first = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    std::vector<std::string> fields = split_fields(line);
    if (!saw_first) {
      saw_first = true;
      n_cols = fields.size();
      std::vector<double> parsed(n_cols);
      bool numeric = true;
      for (std::size_t j = 0; j < n_cols && numeric; ++j)
        numeric = parse_cell(fields[j], parsed[j]);
      if (numeric) rows.push_back(std::move(parsed));
      continue;  // non-numeric first line is a header; column count stands
    }
    if (fields.size() != n_cols)
      throw CsvError(name + ": row " + std::to_string(line_no) + " has " +
                     std::to_string(fields.size()) + " fields, expected " +
                     std::to_string(n_cols));
    std::vector<double> parsed(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (!parse_cell(fields[j], parsed[j]))
        throw CsvError(name + ": row " + std::to_string(line_no) + " column " +
                       std::to_string(j + 1) + ": cannot parse \"" +
                       trimmed(fields[j]) + "\" as a finite number");
    }
    rows.push_back(std::move(parsed));
  }
  if (rows.empty()) throw CsvError(name + ": no data rows");
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(n_cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < n_cols; ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

Mat read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path + ": cannot open file");
  return read_csv(in, path);
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, const Mat& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  if (!out) throw CsvError(path + ": cannot open file for writing");
  write_csv(out, m);
}

std::string csv_string(const Mat& m) {
  std::ostringstream out;
  write_csv(out, m);
  return out.str();
}

}  // namespace scca
