#include "gridflow/sparse/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <vector>

namespace gridflow {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string write_impl(const SparseMatrix<T>& a, std::string_view field) {
  std::ostringstream out;
  out << "%%MatrixMarket matrix coordinate " << field << " general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      out << i + 1 << ' ' << cols[k] + 1;
      if constexpr (std::is_same_v<T, double>) {
        out << ' ' << format_double(vals[k]);
      } else {
        out << ' ' << format_double(vals[k].real()) << ' ' << format_double(vals[k].imag());
      }
      out << '\n';
    }
  }
  return out.str();
}

struct Header {
  std::string field;
  std::string symmetry;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <typename T>
SparseMatrix<T> read_impl(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw DimensionError("matrix market: empty input");
  std::istringstream hdr(line);
  std::string banner, object, format;
  Header h;
  hdr >> banner >> object >> format >> h.field >> h.symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate") {
    throw DimensionError("matrix market: expected a '%%MatrixMarket matrix coordinate' header");
  }
  h.field = lower(h.field);
  h.symmetry = lower(h.symmetry);
  const bool is_complex = h.field == "complex";
  const bool is_pattern = h.field == "pattern";
  if (!is_complex && !is_pattern && h.field != "real" && h.field != "integer" && h.field != "double") {
    throw DimensionError("matrix market: unsupported field '" + h.field + "'");
  }
  if constexpr (std::is_same_v<T, double>) {
    if (is_complex) throw DimensionError("matrix market: complex data cannot be read as a real matrix");
  }
  const bool symmetric = h.symmetry == "symmetric" || h.symmetry == "hermitian";
  const bool skew = h.symmetry == "skew-symmetric";
  if (!symmetric && !skew && h.symmetry != "general") {
    throw DimensionError("matrix market: unsupported symmetry '" + h.symmetry + "'");
  }

  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  std::size_t rows = 0, cols = 0, count = 0;
  {
    std::istringstream sz(line);
    if (!(sz >> rows >> cols >> count)) throw DimensionError("matrix market: malformed size line");
  }
  std::vector<Triplet<T>> entries;
  entries.reserve(symmetric || skew ? 2 * count : count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line)) throw DimensionError("matrix market: expected " + std::to_string(count) + " entries");
    if (line.empty() || line[0] == '%') {
      --k;
      continue;
    }
    std::istringstream row(line);
    std::size_t i = 0, j = 0;
    double re = 1.0, im = 0.0;
    row >> i >> j;
    if (!is_pattern) row >> re;
    if (is_complex) row >> im;
    if (!row || i == 0 || j == 0) throw DimensionError("matrix market: malformed entry line " + std::to_string(k + 1));
    T value;
    if constexpr (std::is_same_v<T, double>) {
      value = re;
    } else {
      value = T(re, im);
    }
    entries.push_back({i - 1, j - 1, value});
    if ((symmetric || skew) && i != j) {
      T mirrored = skew ? -value : value;
      if constexpr (!std::is_same_v<T, double>) {
        if (h.symmetry == "hermitian") mirrored = std::conj(value);
      }
      entries.push_back({j - 1, i - 1, mirrored});
    }
  }
  return SparseMatrix<T>::from_triplets(entries, rows, cols);
}

}  // namespace

std::string write_matrix_market(const RealMatrix& a) { return write_impl(a, "real"); }
std::string write_matrix_market(const ComplexMatrix& a) { return write_impl(a, "complex"); }

RealMatrix read_matrix_market_real(std::string_view text) { return read_impl<double>(text); }
ComplexMatrix read_matrix_market_complex(std::string_view text) { return read_impl<std::complex<double>>(text); }

}  // namespace gridflow
