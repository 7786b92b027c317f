#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rfc {

/// 17 significant digits: every finite double reads back bit-exact.
std::string format_double(double v);

/// Header line plus rows of numbers, comma separated, LF line endings.
void write_csv_header(std::ostream& os, const std::vector<std::string>& columns);
void write_csv_row(std::ostream& os, const std::vector<double>& values);

/// Parses a numeric CSV written by the functions above. Lines starting with
/// '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& text);

}  // namespace rfc
