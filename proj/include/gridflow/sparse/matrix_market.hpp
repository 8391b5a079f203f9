#pragma once

#include <string>
#include <string_view>

#include "gridflow/sparse/matrix.hpp"

namespace gridflow {

// Matrix Market coordinate format (1-based indices), for dumping Y-bus and
// Jacobian matrices while debugging. Symmetric files are expanded on read.

std::string write_matrix_market(const RealMatrix& a);
std::string write_matrix_market(const ComplexMatrix& a);

/// Accepts real, integer and pattern fields (pattern entries read as 1).
RealMatrix read_matrix_market_real(std::string_view text);
/// Accepts complex fields, and real/integer ones with zero imaginary part.
ComplexMatrix read_matrix_market_complex(std::string_view text);

}  // namespace gridflow
