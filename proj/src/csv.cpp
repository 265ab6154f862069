#include "alphadisc/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "alphadisc/errors.hpp"

namespace alphadisc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_number(std::string_view field, double& out) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size() && std::isfinite(out);
}

}  // namespace

Matrix read_csv_matrix(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    std::vector<double> values(fields.size());
    std::size_t bad = fields.size();
    for (std::size_t k = 0; k < fields.size() && bad == fields.size(); ++k) {
      if (!parse_number(fields[k], values[k])) bad = k;
    }
    if (bad != fields.size()) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw ParseError(source + ": data row " + std::to_string(rows.size() + 1) + " (line " +
                       std::to_string(line_no) + "), field " + std::to_string(bad + 1) +
                       ": not a finite number: '" + std::string(fields[bad]) + "'");
    }
    header_allowed = false;
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw ParseError(source + ": data row " + std::to_string(rows.size() + 1) + " (line " +
                       std::to_string(line_no) + ") has " + std::to_string(values.size()) +
                       " fields, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Matrix load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_csv_matrix(in, path.string());
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv_matrix(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  if (!header.empty()) out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

}  // namespace alphadisc
