#include "fmsolve/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace fmsolve {

namespace {

double parse_cell(const std::string& cell, std::size_t line_number) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  double value = 0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) {
    std::ostringstream msg;
    msg << "line " << line_number << ": cannot parse '" << cell << "' as a decimal float";
    throw std::runtime_error(msg.str());
  }
  return value;
}

}  // namespace

Matrixd read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string cell =
          comma == std::string::npos ? line.substr(start) : line.substr(start, comma - start);
      row.push_back(parse_cell(cell, line_number));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << "line " << line_number << ": ragged row with " << row.size() << " cells, expected "
          << rows.front().size();
      throw std::runtime_error(msg.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("matrix file holds no rows");

  Matrixd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

Matrixd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_matrix_csv(in);
}

std::string format_value(double value, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, value);
  return buf;
}

void write_matrix_csv(std::ostream& out, const Matrixd& m, int significant_digits) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_value(m(i, j), significant_digits);
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrixd& m, int significant_digits) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrix_csv(out, m, significant_digits);
}

}  // namespace fmsolve
