#include "gridflow/linear/lu.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gridflow {

namespace {

constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();

/// Growing column-compressed storage for the factors while they are built.
struct ColumnStore {
  std::vector<std::size_t> start{0};
  std::vector<std::size_t> index;
  std::vector<double> value;

  void push(std::size_t i, double v) {
    index.push_back(i);
    value.push_back(v);
  }
  void close_column() { start.push_back(index.size()); }
};

}  // namespace

LUFactors lu_factorize(const RealMatrix& a, const Permutation& col_perm, double pivot_threshold) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("lu_factorize: matrix must be square");
  if (col_perm.size() != n) throw DimensionError("lu_factorize: column permutation size does not match");
  if (!(pivot_threshold > 0.0 && pivot_threshold <= 1.0)) {
    throw DimensionError("lu_factorize: pivot threshold must lie in (0, 1]");
  }

  // Rows of A^T are the columns of A.
  const RealMatrix at = a.transpose();
  const auto at_offsets = at.row_offsets();
  const auto at_rows = at.col_indices();
  const auto at_vals = at.values();

  ColumnStore l;  // strictly lower part, original row indices
  ColumnStore u;  // upper part incl. diagonal, pivot-step row indices
  l.index.reserve(2 * a.nnz());
  l.value.reserve(2 * a.nnz());
  u.index.reserve(2 * a.nnz());
  u.value.reserve(2 * a.nnz());

  std::vector<std::size_t> pinv(n, kUnset);
  std::vector<double> x(n, 0.0);
  std::vector<std::size_t> visit_mark(n, kUnset);
  std::vector<std::size_t> topo;        // reach in reverse postorder after reversal
  std::vector<std::size_t> dfs_stack;   // node stack
  std::vector<std::size_t> dfs_cursor;  // per-node position in its L column
  dfs_cursor.resize(n, 0);
  topo.reserve(n);

  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t col = col_perm.old_index(k);

    // Symbolic step: rows reachable from the column's nonzeros through the
    // graph of the L columns finished so far, in topological order.
    topo.clear();
    for (std::size_t e = at_offsets[col]; e < at_offsets[col + 1]; ++e) {
      const std::size_t start = at_rows[e];
      if (visit_mark[start] == k) continue;
      dfs_stack.push_back(start);
      visit_mark[start] = k;
      dfs_cursor[start] = pinv[start] == kUnset ? 0 : l.start[pinv[start]];
      while (!dfs_stack.empty()) {
        const std::size_t j = dfs_stack.back();
        const std::size_t s = pinv[j];
        bool descended = false;
        if (s != kUnset) {
          const std::size_t end = l.start[s + 1];
          while (dfs_cursor[j] < end) {
            const std::size_t i = l.index[dfs_cursor[j]++];
            if (visit_mark[i] != k) {
              visit_mark[i] = k;
              dfs_cursor[i] = pinv[i] == kUnset ? 0 : l.start[pinv[i]];
              dfs_stack.push_back(i);
              descended = true;
              break;
            }
          }
        }
        if (!descended) {
          dfs_stack.pop_back();
          topo.push_back(j);
        }
      }
    }

    // Numeric step: sparse triangular solve with the finished L columns.
    for (std::size_t j : topo) x[j] = 0.0;
    for (std::size_t e = at_offsets[col]; e < at_offsets[col + 1]; ++e) x[at_rows[e]] = at_vals[e];
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      const std::size_t j = *it;
      const std::size_t s = pinv[j];
      if (s == kUnset) continue;
      const double xj = x[j];
      for (std::size_t e = l.start[s]; e < l.start[s + 1]; ++e) x[l.index[e]] -= l.value[e] * xj;
    }

    // Pivot choice among rows not yet pivotal.
    std::size_t pivot_row = kUnset;
    double largest = 0.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      const std::size_t i = *it;
      if (pinv[i] != kUnset) continue;
      const double mag = std::abs(x[i]);
      if (mag > largest) {
        largest = mag;
        pivot_row = i;
      }
    }
    if (pivot_row == kUnset || !(largest > 0.0) || !std::isfinite(largest)) {
      throw SingularMatrixError(col, "lu_factorize: no acceptable pivot in column " + std::to_string(col) +
                                         " (elimination step " + std::to_string(k) + ")");
    }
    if (pinv[col] == kUnset && visit_mark[col] == k && std::abs(x[col]) >= pivot_threshold * largest) {
      pivot_row = col;
    }
    const double pivot = x[pivot_row];

    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      const std::size_t j = *it;
      if (pinv[j] != kUnset) u.push(pinv[j], x[j]);
    }
    u.push(k, pivot);
    u.close_column();

    pinv[pivot_row] = k;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      const std::size_t i = *it;
      if (pinv[i] == kUnset) l.push(i, x[i] / pivot);
    }
    l.close_column();
  }

  std::vector<Triplet<double>> lt;
  lt.reserve(l.index.size() + n);
  std::vector<Triplet<double>> ut;
  ut.reserve(u.index.size());
  for (std::size_t k = 0; k < n; ++k) {
    lt.push_back({k, k, 1.0});
    for (std::size_t e = l.start[k]; e < l.start[k + 1]; ++e) lt.push_back({pinv[l.index[e]], k, l.value[e]});
    for (std::size_t e = u.start[k]; e < u.start[k + 1]; ++e) ut.push_back({u.index[e], k, u.value[e]});
  }
  return LUFactors{RealMatrix::from_triplets(lt, n, n), RealMatrix::from_triplets(ut, n, n),
                   Permutation::from_forward(std::move(pinv)), col_perm};
}

std::vector<double> lu_solve(const LUFactors& f, std::span<const double> b) {
  const std::size_t n = f.size();
  if (b.size() != n) {
    throw DimensionError("lu_solve: right-hand side has " + std::to_string(b.size()) + " entries, expected " +
                         std::to_string(n));
  }
  std::vector<double> y = f.row_perm.apply(b);

  const auto lo = f.lower.row_offsets();
  const auto lc = f.lower.col_indices();
  const auto lv = f.lower.values();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = y[i];
    for (std::size_t e = lo[i]; e < lo[i + 1] && lc[e] < i; ++e) acc -= lv[e] * y[lc[e]];
    y[i] = acc;
  }

  const auto uo = f.upper.row_offsets();
  const auto uc = f.upper.col_indices();
  const auto uv = f.upper.values();
  for (std::size_t i = n; i-- > 0;) {
    double acc = y[i];
    double diag = 0.0;
    for (std::size_t e = uo[i]; e < uo[i + 1]; ++e) {
      if (uc[e] == i) {
        diag = uv[e];
      } else {
        acc -= uv[e] * y[uc[e]];
      }
    }
    y[i] = acc / diag;
  }

  // y holds the solution in column-permuted order: x[old] = y[col_perm(old)].
  return f.col_perm.unapply(std::span<const double>(y));
}

}  // namespace gridflow
