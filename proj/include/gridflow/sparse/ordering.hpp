#pragma once

#include <cstddef>

#include "gridflow/sparse/matrix.hpp"
#include "gridflow/sparse/permutation.hpp"

namespace gridflow {

/// Fill-reducing elimination ordering by minimum degree on the quotient
/// graph, using approximate external degrees and aggressive element
/// absorption (no supervariable detection). The pattern is symmetrized and
/// its diagonal ignored. Among a few minimum-degree candidates the one
/// creating the least fill wins; remaining ties go to the smaller original
/// degree, then to the lowest index.
///
/// The returned permutation maps each node to its elimination step.
Permutation amd_order(const SparsityPattern& pattern);

/// Reverse Cuthill-McKee ordering of the symmetrized pattern. Each connected
/// component is started from a pseudo-peripheral node, laid out in a
/// contiguous range and reversed in place; components appear in order of
/// their lowest node index, so an edgeless pattern yields the identity.
Permutation rcm_order(const SparsityPattern& pattern);

/// Number of entries created below the diagonal when the symmetrized pattern
/// is eliminated in the order given by `perm` (perm(i) = elimination step).
std::size_t symbolic_fill(const SparsityPattern& pattern, const Permutation& perm);

/// max |i - j| over stored entries; 0 for an empty or diagonal pattern.
std::size_t bandwidth(const SparsityPattern& pattern);

/// Bandwidth of the symmetrically permuted pattern P A P^T.
std::size_t bandwidth(const SparsityPattern& pattern, const Permutation& perm);

}  // namespace gridflow
