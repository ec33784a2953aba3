#pragma once

#include "roughlab/paths.hpp"

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace roughlab {

/// One CSV cell: text, integer, real (written with 17 significant digits),
/// or boolean (written as true/false).
using CsvCell = std::variant<std::string, long long, double, bool>;

/// Formats a real so that it round-trips: 17 significant digits, '.' decimal,
/// "inf"/"-inf"/"nan" for non-finite values.
std::string format_real(double x);

/// RFC 4180 table: mandatory header, CRLF-free "\n" line endings, fields
/// quoted only when they contain a comma, quote, or newline.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<CsvCell> row);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<CsvCell>& row(std::size_t i) const { return rows_[i]; }

  void write(std::ostream& out) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

/// Inverse of format_real; throws ArgumentError on malformed input.
double parse_real(const std::string& s);

/// Parses an RFC 4180 document into rows of raw fields (header included).
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

/// Path CSV: header `t,x1,...,xd`, one row per grid point.
void write_path_csv(const SampledPath& path, std::ostream& out);
SampledPath read_path_csv(std::istream& in);

}  // namespace roughlab
