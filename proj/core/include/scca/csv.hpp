#pragma once

#include <iosfwd>
#include <string>

#include "scca/types.hpp"

namespace scca {

// Numeric CSV, rows = observations, columns = variables, comma separator,
// '.' decimal. A header row is detected by a parse failure in the first line
// and skipped. Values are written with 17 significant digits so a written
// matrix reads back bit-identical.

/// Parse a matrix; `name` labels the source in error messages. Ragged rows
/// and non-numeric cells throw with the offending row and column.
Mat read_csv(std::istream& in, const std::string& name = "<input>");
Mat read_csv_file(const std::string& path);

void write_csv(std::ostream& out, const Mat& m);
void write_csv_file(const std::string& path, const Mat& m);
std::string csv_string(const Mat& m);

/// The 17-significant-digit rendering used for every number the tools emit.
std::string format_double(double value);

}  // namespace scca
