#include "gridflow/sparse/matrix.hpp"

namespace gridflow {

namespace detail {

void check_csr_structure(std::size_t rows, std::size_t cols, std::span<const std::size_t> row_offsets,
                         std::span<const std::size_t> col_indices) {
  if (row_offsets.size() != rows + 1) {
    throw DimensionError("sparse structure: row_offsets has " + std::to_string(row_offsets.size()) +
                         " entries, expected " + std::to_string(rows + 1));
  }
  if (row_offsets.front() != 0 || row_offsets.back() != col_indices.size()) {
    throw DimensionError("sparse structure: row_offsets must start at 0 and end at nnz");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (row_offsets[i] > row_offsets[i + 1]) {
      throw DimensionError("sparse structure: row_offsets decreases at row " + std::to_string(i));
    }
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (col_indices[k] >= cols) {
        throw DimensionError("sparse structure: column " + std::to_string(col_indices[k]) + " in row " +
                             std::to_string(i) + " is out of range");
      }
      if (k > row_offsets[i] && col_indices[k - 1] >= col_indices[k]) {
        throw DimensionError("sparse structure: columns in row " + std::to_string(i) +
                             " are not strictly increasing");
      }
    }
  }
}

}  // namespace detail

SparsityPattern::SparsityPattern(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                                 std::vector<std::size_t> col_indices)
    : rows_(rows), cols_(cols), row_offsets_(std::move(row_offsets)), col_indices_(std::move(col_indices)) {
  detail::check_csr_structure(rows_, cols_, row_offsets_, col_indices_);
}

SparsityPattern SparsityPattern::from_entries(std::size_t n,
                                              std::span<const std::pair<std::size_t, std::size_t>> entries) {
  std::vector<Triplet<char>> trip;
  trip.reserve(entries.size());
  for (const auto& [i, j] : entries) trip.push_back({i, j, 1});
  return SparseMatrix<char>::from_triplets(trip, n, n).pattern();
}

bool SparsityPattern::contains(std::size_t i, std::size_t j) const noexcept {
  const auto r = row(i);
  return std::binary_search(r.begin(), r.end(), j);
}

SparsityPattern SparsityPattern::symmetric_graph() const {
  if (!is_square()) throw DimensionError("symmetric_graph: pattern must be square");
  std::vector<std::size_t> degree(rows_ + 1, 0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j : row(i)) {
      if (i == j) continue;
      ++degree[i + 1];
      ++degree[j + 1];
    }
  }
  std::partial_sum(degree.begin(), degree.end(), degree.begin());
  std::vector<std::size_t> next(degree.begin(), degree.end() - 1);
  std::vector<std::size_t> adj(degree.back());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j : row(i)) {
      if (i == j) continue;
      adj[next[i]++] = j;
      adj[next[j]++] = i;
    }
  }
  // Sort and deduplicate each adjacency list (structurally symmetric input
  // contributes every edge twice).
  std::vector<std::size_t> offsets(rows_ + 1, 0);
  std::vector<std::size_t> out;
  out.reserve(adj.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    auto first = adj.begin() + static_cast<std::ptrdiff_t>(degree[i]);
    auto last = adj.begin() + static_cast<std::ptrdiff_t>(degree[i + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    out.insert(out.end(), first, last);
    offsets[i + 1] = out.size();
  }
  return SparsityPattern(rows_, cols_, std::move(offsets), std::move(out));
}

}  // namespace gridflow
