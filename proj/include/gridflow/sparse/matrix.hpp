#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridflow/errors.hpp"
#include "gridflow/parallel.hpp"
#include "gridflow/sparse/permutation.hpp"

namespace gridflow {

template <typename T>
struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  T value{};
};

/// Structure-only compressed-row view: row_offsets (n_rows + 1) and sorted,
/// duplicate-free column indices per row.
class SparsityPattern {
 public:
  SparsityPattern() = default;
  SparsityPattern(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                  std::vector<std::size_t> col_indices);

  /// Pattern of a square matrix from (row, col) pairs; duplicates collapse.
  static SparsityPattern from_entries(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return col_indices_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
  std::span<const std::size_t> row(std::size_t i) const noexcept {
    return std::span<const std::size_t>(col_indices_).subspan(row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]);
  }
  bool contains(std::size_t i, std::size_t j) const noexcept;

  /// Pattern of A + A^T with the diagonal removed: the adjacency graph used by
  /// the orderings. Requires a square pattern.
  SparsityPattern symmetric_graph() const;

  friend bool operator==(const SparsityPattern&, const SparsityPattern&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
};

namespace detail {
void check_csr_structure(std::size_t rows, std::size_t cols, std::span<const std::size_t> row_offsets,
                         std::span<const std::size_t> col_indices);
}  // namespace detail

/// Compressed sparse row matrix. Within a row the column indices are strictly
/// increasing; explicit zeros may be stored (the structure is what counts).
template <typename T>
class SparseMatrix {
 public:
  using value_type = T;

  SparseMatrix() = default;

  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<T> values)
      : rows_(rows),
        cols_(cols),
        row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)),
        values_(std::move(values)) {
    detail::check_csr_structure(rows_, cols_, row_offsets_, col_indices_);
    if (values_.size() != col_indices_.size()) {
      throw DimensionError("sparse matrix: " + std::to_string(values_.size()) + " values for " +
                           std::to_string(col_indices_.size()) + " stored entries");
    }
  }

  /// Assembles a matrix from unordered (row, col, value) entries, summing duplicates.
  static SparseMatrix from_triplets(std::span<const Triplet<T>> entries, std::size_t rows, std::size_t cols) {
    std::vector<std::size_t> counts(rows + 1, 0);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& e = entries[k];
      if (e.row >= rows || e.col >= cols) {
        throw DimensionError("from_triplets: entry " + std::to_string(k) + " at (" + std::to_string(e.row) + ", " +
                             std::to_string(e.col) + ") is outside a " + std::to_string(rows) + "x" +
                             std::to_string(cols) + " matrix");
      }
      ++counts[e.row + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());

    // Bucket by row, then sort each row by column and merge duplicates.
    std::vector<std::pair<std::size_t, T>> bucket(entries.size());
    std::vector<std::size_t> next(counts.begin(), counts.end() - 1);
    for (const auto& e : entries) bucket[next[e.row]++] = {e.col, e.value};

    std::vector<std::size_t> offsets(rows + 1, 0);
    std::vector<std::size_t> cols_out;
    std::vector<T> vals_out;
    cols_out.reserve(entries.size());
    vals_out.reserve(entries.size());
    for (std::size_t i = 0; i < rows; ++i) {
      auto first = bucket.begin() + static_cast<std::ptrdiff_t>(counts[i]);
      auto last = bucket.begin() + static_cast<std::ptrdiff_t>(counts[i + 1]);
      std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
      for (auto it = first; it != last; ++it) {
        if (!cols_out.empty() && cols_out.size() > offsets[i] && cols_out.back() == it->first) {
          vals_out.back() += it->second;
        } else {
          cols_out.push_back(it->first);
          vals_out.push_back(it->second);
        }
      }
      offsets[i + 1] = cols_out.size();
    }
    return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals_out));
  }

  static SparseMatrix from_triplets(const std::vector<Triplet<T>>& entries, std::size_t rows, std::size_t cols) {
    return from_triplets(std::span<const Triplet<T>>(entries), rows, cols);
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::iota(offsets.begin(), offsets.end(), std::size_t{0});
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<T>(n, T{1}));
  }

  static SparseMatrix zero(std::size_t rows, std::size_t cols) {
    return SparseMatrix(rows, cols, std::vector<std::size_t>(rows + 1, 0), {}, {});
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
  std::span<const T> values() const noexcept { return values_; }
  /// Mutable values; the structure stays fixed.
  std::span<T> values() noexcept { return values_; }

  /// Position of (i, j) in values(), if stored.
  std::optional<std::size_t> find(std::size_t i, std::size_t j) const {
    const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
    const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return std::nullopt;
    return static_cast<std::size_t>(it - col_indices_.begin());
  }

  /// Stored value at (i, j), or zero.
  T coeff(std::size_t i, std::size_t j) const {
    const auto pos = find(i, j);
    return pos ? values_[*pos] : T{};
  }

  SparsityPattern pattern() const { return SparsityPattern(rows_, cols_, row_offsets_, col_indices_); }

  SparseMatrix transpose() const {
    std::vector<std::size_t> offsets(cols_ + 1, 0);
    for (std::size_t c : col_indices_) ++offsets[c + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<std::size_t> next(offsets.begin(), offsets.end() - 1);
    std::vector<std::size_t> rows_out(nnz());
    std::vector<T> vals_out(nnz());
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        const std::size_t dst = next[col_indices_[k]]++;
        rows_out[dst] = i;
        vals_out[dst] = values_[k];
      }
    }
    return SparseMatrix(cols_, rows_, std::move(offsets), std::move(rows_out), std::move(vals_out));
  }

  /// Largest stored magnitude (0 for an empty matrix).
  double max_abs() const {
    double m = 0.0;
    for (const T& v : values_) m = std::max(m, static_cast<double>(std::abs(v)));
    return m;
  }

  /// Row-major dense copy; meant for tests and small diagnostics.
  std::vector<T> to_dense() const {
    std::vector<T> dense(rows_ * cols_, T{});
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) dense[i * cols_ + col_indices_[k]] = values_[k];
    }
    return dense;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<T> values_;
};

using RealMatrix = SparseMatrix<double>;
using ComplexMatrix = SparseMatrix<std::complex<double>>;

/// B[row_perm(i), col_perm(j)] = A[i, j].
template <typename T>
SparseMatrix<T> permute(const SparseMatrix<T>& a, const Permutation& row_perm, const Permutation& col_perm) {
  if (row_perm.size() != a.rows() || col_perm.size() != a.cols()) {
    throw DimensionError("permute: permutation sizes (" + std::to_string(row_perm.size()) + ", " +
                         std::to_string(col_perm.size()) + ") do not match a " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " matrix");
  }
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  std::vector<std::size_t> out_offsets(a.rows() + 1, 0);
  for (std::size_t new_row = 0; new_row < a.rows(); ++new_row) {
    const std::size_t old_row = row_perm.old_index(new_row);
    out_offsets[new_row + 1] = out_offsets[new_row] + (offsets[old_row + 1] - offsets[old_row]);
  }
  std::vector<std::size_t> out_cols(a.nnz());
  std::vector<T> out_vals(a.nnz());
  std::vector<std::pair<std::size_t, T>> row_buf;
  for (std::size_t new_row = 0; new_row < a.rows(); ++new_row) {
    const std::size_t old_row = row_perm.old_index(new_row);
    row_buf.clear();
    for (std::size_t k = offsets[old_row]; k < offsets[old_row + 1]; ++k) row_buf.emplace_back(col_perm(cols[k]), vals[k]);
    std::sort(row_buf.begin(), row_buf.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::size_t dst = out_offsets[new_row];
    for (const auto& [c, v] : row_buf) {
      out_cols[dst] = c;
      out_vals[dst] = v;
      ++dst;
    }
  }
  return SparseMatrix<T>(a.rows(), a.cols(), std::move(out_offsets), std::move(out_cols), std::move(out_vals));
}

/// y = A x into a caller-provided buffer. Rows are split into `thread_count`
/// contiguous blocks and each row is accumulated left to right by a single
/// worker, so y is bit-identical for every thread count.
template <typename T>
void spmv_into(const SparseMatrix<T>& a, std::span<const T> x, std::span<T> y, std::size_t thread_count) {
  if (x.size() != a.cols() || y.size() != a.rows()) {
    throw DimensionError("spmv: matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         ", x has " + std::to_string(x.size()) + " entries, y has " + std::to_string(y.size()));
  }
  if (thread_count == 0) throw DimensionError("spmv: thread_count must be at least 1");
  const std::size_t* offsets = a.row_offsets().data();
  const std::size_t* cols = a.col_indices().data();
  const T* vals = a.values().data();
  const T* xs = x.data();
  T* ys = y.data();
  for_each_block(a.rows(), thread_count, [=](BlockRange r, std::size_t) {
    for (std::size_t i = r.begin; i < r.end; ++i) {
      T acc{};
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) acc += vals[k] * xs[cols[k]];
      ys[i] = acc;
    }
  });
}

template <typename T>
std::vector<T> spmv(const SparseMatrix<T>& a, std::span<const T> x, std::size_t thread_count = 1) {
  std::vector<T> y(a.rows());
  spmv_into(a, x, std::span<T>(y), thread_count);
  return y;
}

template <typename T>
std::vector<T> spmv(const SparseMatrix<T>& a, const std::vector<T>& x, std::size_t thread_count = 1) {
  return spmv(a, std::span<const T>(x), thread_count);
}

}  // namespace gridflow
