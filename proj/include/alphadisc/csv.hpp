#pragma once

// Comma-separated numeric matrices: optional single header row, one record
// per line, every field a decimal float.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "alphadisc/types.hpp"

namespace alphadisc {

/// Throws ParseError naming the 1-based data row and field on a malformed
/// value or ragged row, and for an empty input.
Matrix read_csv_matrix(std::istream& in, const std::string& source = "<stream>");

/// Throws ParseError if the file cannot be opened.
Matrix load_csv_matrix(const std::filesystem::path& path);

/// %.17g, so every double round-trips.
std::string format_double(double v);

void write_csv_matrix(std::ostream& out, const Matrix& m,
                      const std::vector<std::string>& header = {});

}  // namespace alphadisc
