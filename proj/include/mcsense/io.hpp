#pragma once

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mcsense/matrix_core.hpp"

namespace mcsense {

/// Shortest decimal string that round-trips the given binary64 value.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline bool parse_double(const std::string& token, double& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  if (end == begin || errno == ERANGE) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      tokens.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  tokens.push_back(cur);
  return tokens;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Reads a dense row-major CSV matrix. A single leading non-numeric line is
/// treated as an optional header and skipped. Values are parsed as binary64
/// and cast to Scalar.
template <typename Scalar = double>
DenseMatrix<Scalar> read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto tokens = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(tokens.size());
    bool ok = true;
    for (const auto& t : tokens) {
      double v;
      if (!detail::parse_double(detail::trim(t), v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (header_allowed && rows.empty()) {
        header_allowed = false;
        continue;
      }
      fail(ErrorCode::ParseError,
           "CSV line " + std::to_string(lineno) + ": non-numeric field");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(ErrorCode::ParseError,
           "CSV line " + std::to_string(lineno) + ": expected " +
               std::to_string(rows.front().size()) + " fields, got " +
               std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::ParseError, "CSV input contains no data");
  DenseMatrix<Scalar> m(Index(rows.size()), Index(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = Scalar(rows[std::size_t(i)][std::size_t(j)]);
  return m;
}

template <typename Scalar>
void write_matrix_csv(std::ostream& out, const DenseMatrix<Scalar>& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(double(m(i, j)));
    }
    out << '\n';
  }
}

/// Reads a Matrix Market file, array or coordinate format, field real or
/// integer, symmetry general. Duplicate coordinate entries are summed.
template <typename Scalar = double>
DenseMatrix<Scalar> read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::ParseError, "MatrixMarket: empty input");
  std::istringstream hs(line);
  std::string banner, object, fmt, field, symmetry;
  hs >> banner >> object >> fmt >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix")
    fail(ErrorCode::ParseError, "MatrixMarket: bad banner line");
  if (fmt != "coordinate" && fmt != "array")
    fail(ErrorCode::ParseError, "MatrixMarket: format must be coordinate or array");
  if (field != "real" && field != "integer")
    fail(ErrorCode::ParseError, "MatrixMarket: field must be real or integer");
  if (symmetry != "general")
    fail(ErrorCode::ParseError, "MatrixMarket: only general symmetry supported");

  auto next_content = [&](std::string& dst) {
    while (std::getline(in, dst)) {
      const std::string t = detail::trim(dst);
      if (!t.empty() && t[0] != '%') {
        dst = t;
        return true;
      }
    }
    return false;
  };

  if (!next_content(line)) fail(ErrorCode::ParseError, "MatrixMarket: missing size line");
  std::istringstream ss(line);
  long rows = 0, cols = 0, nnz = 0;
  if (fmt == "coordinate") {
    if (!(ss >> rows >> cols >> nnz))
      fail(ErrorCode::ParseError, "MatrixMarket: bad size line");
  } else {
    if (!(ss >> rows >> cols))
      fail(ErrorCode::ParseError, "MatrixMarket: bad size line");
  }
  if (rows <= 0 || cols <= 0)
    fail(ErrorCode::ParseError, "MatrixMarket: non-positive dimensions");
  DenseMatrix<Scalar> m = DenseMatrix<Scalar>::Zero(rows, cols);
  if (fmt == "coordinate") {
    for (long k = 0; k < nnz; ++k) {
      if (!next_content(line))
        fail(ErrorCode::ParseError, "MatrixMarket: expected " +
                                        std::to_string(nnz) + " entries, got " +
                                        std::to_string(k));
      std::istringstream es(line);
      long i, j;
      double v;
      if (!(es >> i >> j >> v) || i < 1 || i > rows || j < 1 || j > cols)
        fail(ErrorCode::ParseError, "MatrixMarket: bad coordinate entry: " + line);
      m(i - 1, j - 1) += Scalar(v);
    }
  } else {
    // array format is column-major
    for (long j = 0; j < cols; ++j)
      for (long i = 0; i < rows; ++i) {
        if (!next_content(line))
          fail(ErrorCode::ParseError, "MatrixMarket: truncated array data");
        double v;
        if (!detail::parse_double(line, v))
          fail(ErrorCode::ParseError, "MatrixMarket: bad array value: " + line);
        m(i, j) = Scalar(v);
      }
  }
  return m;
}

template <typename Scalar>
void write_matrix_market(std::ostream& out, const DenseMatrix<Scalar>& m) {
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      out << format_double(double(m(i, j))) << '\n';
}

/// Reads a matrix from a file, sniffing the format: a %%MatrixMarket banner
/// selects Matrix Market, anything else is parsed as CSV.
template <typename Scalar = double>
DenseMatrix<Scalar> read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open file: " + path);
  std::string first;
  std::getline(in, first);
  in.seekg(0);
  if (first.rfind("%%MatrixMarket", 0) == 0) return read_matrix_market<Scalar>(in);
  return read_matrix_csv<Scalar>(in);
}

}  // namespace mcsense
