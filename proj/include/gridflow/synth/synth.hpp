#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gridflow/grid/network.hpp"
#include "gridflow/threephase/network.hpp"

namespace gridflow {

/// SplitMix64: state += 0x9E3779B97F4A7C15, then the output is mixed with
/// the multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB (shifts 30, 27,
/// 31). Small, portable, and fully determined by the seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// `count` distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample(std::size_t n, std::size_t count);

 private:
  std::uint64_t state_;
};

struct SynthSpec {
  /// Transmission blocks, or feeder replicas.
  std::size_t copies = 1;
  /// Random links between each pair of adjacent transmission blocks.
  std::size_t links_per_pair = 2;
  std::uint64_t seed = 0;
  /// Also link the last block back to the first.
  bool ring = false;

  void validate() const;
  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

/// Block k holds a copy of every base bus with its id shifted by k times the
/// base id span. Only block 0 keeps the slack; the other copies of it become
/// PV buses at the same setpoint, generating what the base slack delivers in
/// the solved base case so every block stays roughly balanced. Adjacent
/// blocks (k, k+1) are joined by `links_per_pair` distinct base branches
/// (u, v), drawn uniformly, each copied as block k's u to block k+1's v with
/// the same impedance.
///
/// Throws std::invalid_argument if links_per_pair exceeds the base branch
/// count, NetworkError for an invalid base, and a Krylov or Jacobian error if
/// the base case cannot be solved.
SinglePhaseNetwork replicate_transmission(const SinglePhaseNetwork& base, const SynthSpec& spec);

/// Starting state for the network replicate_transmission(base, spec) builds:
/// the solved base state in every block, with each block's angles shifted so
/// its incoming links carry no first-order flow. Flat start stops converging
/// beyond a few tens of blocks because these shifts build up along the chain.
VoltageState replicated_start(const SinglePhaseNetwork& base, const SynthSpec& spec);

/// The source bus and the bus it feeds stay shared; every other bus and
/// branch is copied `spec.copies` times, hanging off the shared feed bus.
/// The source branch's series admittance is scaled by the copy count (its
/// impedance divided by it). Throws NetworkError unless the base is a tree
/// whose source has exactly one branch.
ThreePhaseNetwork replicate_feeder(const ThreePhaseNetwork& base, const SynthSpec& spec);

}  // namespace gridflow
