#pragma once

#include "fmsolve/types.hpp"

#include <iosfwd>
#include <string>

namespace fmsolve {

// Shared matrix interchange format: one row per line, comma-separated decimal
// floats, no header. Readers reject ragged rows.

Matrixd read_matrix_csv(std::istream& in);
Matrixd read_matrix_csv(const std::string& path);

void write_matrix_csv(std::ostream& out, const Matrixd& m, int significant_digits = 17);
void write_matrix_csv(const std::string& path, const Matrixd& m, int significant_digits = 17);

/// Shortest representation with the given significant digits; 17 digits
/// round-trips a double exactly.
std::string format_value(double value, int significant_digits = 17);

}  // namespace fmsolve
