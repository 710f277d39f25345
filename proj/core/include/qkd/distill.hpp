#pragma once

// Key distillation: interactive error reconciliation by public parity
// comparisons, then privacy amplification by random-subset parities.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qkd/bits.hpp"
#include "qkd/channel.hpp"
#include "qkd/rng.hpp"

namespace qkd {

/// l = clamp(ceil(numerator / max(R, min_rate)), min_length, key length)
struct BlockPolicy {
  double numerator = 0.73;
  double min_rate = 0.01;
  std::size_t min_length = 4;
};

struct ReconcileParams {
  BlockPolicy block_policy;
  /// Consecutive clean random-subset checks required to stop.
  std::size_t n_clean = 10;
  /// Permutation passes; passes also stop early once one finds no mismatch.
  std::size_t max_passes = 4;
  /// Upper bound on random-subset checks.
  std::size_t max_subset_checks = 400;

  /// Throws Errc::InvalidConfig.
  void validate() const;
};

struct DistillAccounting {
  /// One per compared block, subblock, or subset.
  std::uint64_t parity_comparisons = 0;
  /// Bits dropped after each parity comparison.
  std::uint64_t parity_discards = 0;
  /// Located erroneous bits removed at the bottom of a bisection.
  std::uint64_t error_deletions = 0;
  std::uint64_t bisection_steps = 0;
  std::uint64_t max_bisection_depth = 0;
  std::uint64_t passes_run = 0;
  std::uint64_t subset_checks = 0;

  std::uint64_t bits_discarded() const noexcept { return parity_discards + error_deletions; }
  /// Parity information surviving the discard rule: each compared parity
  /// loses its last bit, so nothing is left for Eve.
  std::uint64_t surviving_parity_leak() const noexcept { return 0; }
};

std::size_t block_length(double rate, const BlockPolicy& policy, std::size_t key_length);

struct ReconcileResult {
  Bitstring alice;
  Bitstring bob;
  DistillAccounting accounting;
};

/// Both keys are processed with the same public choices; every parity Alice
/// and Bob compare is posted to `transcript`. Throws Errc::LengthMismatch.
ReconcileResult reconcile(Bitstring alice, Bitstring bob, double rate, const ReconcileParams& params, Rng& rng,
                          PublicTranscript& transcript);

/// Harness-level check: the parties themselves cannot observe this.
/// Throws Errc::ReconciliationFailed if the keys differ.
void verify_reconciled(const Bitstring& alice, const Bitstring& bob);

/// k = min(n, ceil(leak_factor * R * n)) + surviving parity leakage.
std::uint64_t leaked_bits_bound(double rate, std::size_t n, const DistillAccounting& accounting,
                                double leak_factor = 2.0);

/// n - k - s nonempty subsets of {0..n-1}, each index included with
/// probability 1/2, regenerated on demand from a public seed. Subset i is
/// the i-th non-empty mask drawn from Rng(seed), one 64-bit word per 64 key
/// positions, unused high bits cleared.
struct SubsetFamily {
  std::uint64_t seed = 0;
  std::size_t key_length = 0;
  std::size_t count = 0;

  void for_each(const std::function<void(std::span<const std::uint64_t>)>& visit) const;
  std::vector<std::vector<std::size_t>> materialize() const;
};

struct AmplifyResult {
  Bitstring final_key;
  SubsetFamily subsets;
};

/// Alice's side: draws the subset seed, posts it, and compresses her key.
/// Throws Errc::KeyExhausted if n - k - s < 1.
AmplifyResult privacy_amplify(const Bitstring& key, std::uint64_t k, std::uint64_t s, Rng& rng,
                              PublicTranscript& transcript);

/// Parity of `key` over every subset of the family; Bob's side of the step.
Bitstring apply_subsets(const Bitstring& key, const SubsetFamily& subsets);

}  // namespace qkd
