#include "roughlab/csv.hpp"

#include "roughlab/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace roughlab {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string cell_text(const CsvCell& cell) {
  struct Visitor {
    std::string operator()(const std::string& s) const { return quote_if_needed(s); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(Visitor{}, cell);
}

}  // namespace

double parse_real(const std::string& s) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  if (s == "nan") return NAN;
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ArgumentError("CSV: not a number: '" + s + "'");
  return v;
}

void CsvTable::add_row(std::vector<CsvCell> row) {
  detail::require(row.size() == header_.size(), "CsvTable: row width does not match header");
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << quote_if_needed(header_[i]);
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
    out << '\n';
  }
}

std::string CsvTable::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ArgumentError("CSV: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_path_csv(const SampledPath& path, std::ostream& out) {
  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < path.dim(); ++k) header.push_back("x" + std::to_string(k + 1));
  CsvTable table(header);
  for (std::size_t i = 0; i < path.size(); ++i) {
    std::vector<CsvCell> row{path.time(i)};
    for (std::size_t k = 0; k < path.dim(); ++k) row.emplace_back(path.value(i, k));
    table.add_row(std::move(row));
  }
  table.write(out);
}

SampledPath read_path_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  detail::require(rows.size() >= 2, "path CSV: need a header and at least one row");
  const auto& header = rows.front();
  detail::require(header.size() >= 2 && header[0] == "t", "path CSV: header must be t,x1,...,xd");
  const std::size_t d = header.size() - 1;
  for (std::size_t k = 0; k < d; ++k)
    detail::require(header[k + 1] == "x" + std::to_string(k + 1), "path CSV: bad column name " + header[k + 1]);
  std::vector<double> t;
  Matrix v(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(d));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    detail::require(rows[i].size() == d + 1, "path CSV: ragged row " + std::to_string(i));
    t.push_back(parse_real(rows[i][0]));
    for (std::size_t k = 0; k < d; ++k)
      v(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k)) = parse_real(rows[i][k + 1]);
  }
  return SampledPath(std::move(t), std::move(v));
}

}  // namespace roughlab
