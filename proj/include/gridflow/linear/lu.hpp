#pragma once

#include <span>
#include <vector>

#include "gridflow/sparse/matrix.hpp"
#include "gridflow/sparse/permutation.hpp"

namespace gridflow {

/// permute(A, row_perm, col_perm) = L * U with L unit lower triangular and U
/// upper triangular, both in the permuted numbering.
struct LUFactors {
  RealMatrix lower;
  RealMatrix upper;
  Permutation row_perm;
  Permutation col_perm;

  std::size_t size() const noexcept { return lower.rows(); }
};

/// Left-looking (Gilbert-Peierls) sparse LU. Columns are processed in the
/// order given by `col_perm` (usually amd_order of the pattern); within each
/// column the pivot is chosen by threshold partial pivoting, preferring the
/// entry on the permuted diagonal.
///
/// Throws SingularMatrixError naming the input column that had no nonzero
/// pivot candidate.
LUFactors lu_factorize(const RealMatrix& a, const Permutation& col_perm, double pivot_threshold = 1.0);

/// Solves A x = b with the factors of A.
std::vector<double> lu_solve(const LUFactors& f, std::span<const double> b);

}  // namespace gridflow
