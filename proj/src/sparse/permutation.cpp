#include "gridflow/sparse/permutation.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "gridflow/errors.hpp"

namespace gridflow {

namespace {

std::vector<std::size_t> invert_checked(std::span<const std::size_t> map) {
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> inv(map.size(), unset);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const std::size_t j = map[i];
    if (j >= map.size() || inv[j] != unset) {
      throw DimensionError("permutation: entry " + std::to_string(i) + " -> " + std::to_string(j) +
                           " is out of range or repeated");
    }
    inv[j] = i;
  }
  return inv;
}

}  // namespace

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return Permutation(p, p);
}

Permutation Permutation::from_forward(std::vector<std::size_t> forward) {
  auto inverse = invert_checked(forward);
  return Permutation(std::move(forward), std::move(inverse));
}

Permutation Permutation::from_order(std::vector<std::size_t> order) {
  auto forward = invert_checked(order);
  return Permutation(std::move(forward), std::move(order));
}

Permutation Permutation::inverted() const { return Permutation(inverse_, forward_); }

bool Permutation::is_identity() const noexcept {
  for (std::size_t i = 0; i < forward_.size(); ++i) {
    if (forward_[i] != i) return false;
  }
  return true;
}

}  // namespace gridflow
