#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gridflow {

/// A bijection on [0, n). `forward()[old]` is the new position of `old`;
/// `inverse()[new]` is the old index now sitting at `new`.
class Permutation {
 public:
  Permutation() = default;

  static Permutation identity(std::size_t n);
  /// From new positions indexed by old index. Throws DimensionError if not a bijection.
  static Permutation from_forward(std::vector<std::size_t> forward);
  /// From an elimination/visit order: order[k] is the old index placed k-th.
  static Permutation from_order(std::vector<std::size_t> order);

  std::size_t size() const noexcept { return forward_.size(); }
  std::size_t operator()(std::size_t old_index) const { return forward_[old_index]; }
  std::size_t old_index(std::size_t new_index) const { return inverse_[new_index]; }

  std::span<const std::size_t> forward() const noexcept { return forward_; }
  std::span<const std::size_t> inverse() const noexcept { return inverse_; }

  Permutation inverted() const;
  bool is_identity() const noexcept;

  /// y[p(i)] = x[i].
  template <typename T>
  std::vector<T> apply(std::span<const T> x) const {
    std::vector<T> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[forward_[i]] = x[i];
    return y;
  }

  /// x[i] = y[p(i)]; undoes apply().
  template <typename T>
  std::vector<T> unapply(std::span<const T> y) const {
    std::vector<T> x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[forward_[i]];
    return x;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  Permutation(std::vector<std::size_t> forward, std::vector<std::size_t> inverse)
      : forward_(std::move(forward)), inverse_(std::move(inverse)) {}

  std::vector<std::size_t> forward_;
  std::vector<std::size_t> inverse_;
};

}  // namespace gridflow
