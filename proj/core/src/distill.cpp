#include "qkd/distill.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "qkd/error.hpp"

namespace qkd {

void ReconcileParams::validate() const {
  if (block_policy.min_length < 2) throw Error(Errc::InvalidConfig, "block length floor must be >= 2");
  if (!(block_policy.numerator > 0.0) || !(block_policy.min_rate > 0.0)) {
    throw Error(Errc::InvalidConfig, "block policy constants must be positive");
  }
  if (n_clean < 1) throw Error(Errc::InvalidConfig, "n_clean must be >= 1");
}

std::size_t block_length(double rate, const BlockPolicy& policy, std::size_t key_length) {
  const double r = std::max(rate, policy.min_rate);
  // The epsilon keeps exact quotients such as 0.73 / 0.01 from rounding up.
  auto l = static_cast<std::size_t>(std::ceil(policy.numerator / r - 1e-9));
  l = std::max(l, policy.min_length);
  l = std::min(l, key_length);
  return std::max<std::size_t>(l, 2);
}

namespace {

class Reconciler {
 public:
  Reconciler(Bitstring& alice, Bitstring& bob, PublicTranscript& transcript, DistillAccounting& acc)
      : alice_(alice), bob_(bob), transcript_(transcript), acc_(acc), alive_(alice.size(), 1) {}

  /// Public parity comparison over `positions` (indices into the current
  /// arrays). The last listed position is discarded afterwards.
  bool compare(const std::vector<std::uint64_t>& positions) {
    Bit pa = 0;
    Bit pb = 0;
    for (auto p : positions) {
      pa ^= alice_[p];
      pb ^= bob_[p];
    }
    transcript_.post(Party::Alice, MessageKind::Parity, PayloadWriter().indices(positions).byte(pa).take());
    transcript_.post(Party::Bob, MessageKind::Parity, PayloadWriter().byte(pb).take());
    ++acc_.parity_comparisons;
    alive_[positions.back()] = 0;
    ++acc_.parity_discards;
    return pa != pb;
  }

  /// Binary search inside a set whose parity disagreed (minus its discarded
  /// last bit). Both halves are compared; the search continues in each half
  /// that disagrees.
  void bisect(std::vector<std::uint64_t> positions, std::uint64_t depth) {
    if (positions.empty()) return;
    if (positions.size() == 1) {
      alive_[positions.front()] = 0;
      ++acc_.error_deletions;
      return;
    }
    ++acc_.bisection_steps;
    acc_.max_bisection_depth = std::max(acc_.max_bisection_depth, depth);
    const std::size_t half = positions.size() / 2;
    std::vector<std::uint64_t> left(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<std::uint64_t> right(positions.begin() + static_cast<std::ptrdiff_t>(half), positions.end());
    const bool left_bad = compare(left);
    const bool right_bad = compare(right);
    left.pop_back();
    right.pop_back();
    if (left_bad) bisect(std::move(left), depth + 1);
    if (right_bad) bisect(std::move(right), depth + 1);
  }

  /// Drops discarded bits; returns the new length.
  std::size_t compact() {
    std::size_t w = 0;
    for (std::size_t r = 0; r < alive_.size(); ++r) {
      if (!alive_[r]) continue;
      alice_[w] = alice_[r];
      bob_[w] = bob_[r];
      ++w;
    }
    alice_.resize(w);
    bob_.resize(w);
    alive_.assign(w, 1);
    return w;
  }

  void permute(const std::vector<std::uint64_t>& perm) {
    Bitstring a(alice_.size());
    Bitstring b(bob_.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      a[i] = alice_[perm[i]];
      b[i] = bob_[perm[i]];
    }
    alice_.swap(a);
    bob_.swap(b);
  }

 private:
  Bitstring& alice_;
  Bitstring& bob_;
  PublicTranscript& transcript_;
  DistillAccounting& acc_;
  std::vector<std::uint8_t> alive_;
};

}  // namespace

ReconcileResult reconcile(Bitstring alice, Bitstring bob, double rate, const ReconcileParams& params, Rng& rng,
                          PublicTranscript& transcript) {
  if (alice.size() != bob.size()) throw Error(Errc::LengthMismatch, "reconcile needs equal-length keys");
  params.validate();

  ReconcileResult out;
  Reconciler r(alice, bob, transcript, out.accounting);

  // Permuted block passes.
  for (std::size_t pass = 0; pass < params.max_passes && alice.size() >= 2; ++pass) {
    std::vector<std::uint64_t> perm(alice.size());
    std::iota(perm.begin(), perm.end(), std::uint64_t{0});
    rng.shuffle(std::span<std::uint64_t>(perm));
    transcript.post(Party::Alice, MessageKind::Permutation, PayloadWriter().indices(perm).take());
    r.permute(perm);

    const std::size_t len = alice.size();
    const std::size_t l = block_length(rate, params.block_policy, len);
    bool found = false;
    for (std::size_t start = 0; start + 2 <= len; start += l) {
      const std::size_t end = std::min(start + l, len);
      std::vector<std::uint64_t> block(end - start);
      std::iota(block.begin(), block.end(), static_cast<std::uint64_t>(start));
      if (r.compare(block)) {
        found = true;
        block.pop_back();
        r.bisect(std::move(block), 1);
      }
    }
    r.compact();
    ++out.accounting.passes_run;
    if (!found) break;
  }

  // Random-subset checks until n_clean consecutive agreements.
  std::size_t clean = 0;
  while (clean < params.n_clean && out.accounting.subset_checks < params.max_subset_checks &&
         alice.size() >= 2) {
    std::vector<std::uint64_t> subset;
    while (subset.size() < 2) {
      subset.clear();
      for (std::uint64_t i = 0; i < alice.size(); ++i)
        if (rng.coin()) subset.push_back(i);
    }
    ++out.accounting.subset_checks;
    if (r.compare(subset)) {
      clean = 0;
      subset.pop_back();
      r.bisect(std::move(subset), 1);
    } else {
      ++clean;
    }
    r.compact();
  }

  out.alice = std::move(alice);
  out.bob = std::move(bob);
  return out;
}

void verify_reconciled(const Bitstring& alice, const Bitstring& bob) {
  if (alice != bob) {
    const std::size_t d = alice.size() == bob.size() ? hamming_distance(alice, bob) : 0;
    throw Error(Errc::ReconciliationFailed,
                "reconciled keys differ (" + std::to_string(d) + " positions, lengths " +
                    std::to_string(alice.size()) + "/" + std::to_string(bob.size()) + ")");
  }
}

std::uint64_t leaked_bits_bound(double rate, std::size_t n, const DistillAccounting& accounting, double leak_factor) {
  const double raw = std::ceil(leak_factor * rate * static_cast<double>(n) - 1e-9);
  const auto k = static_cast<std::uint64_t>(std::max(0.0, raw)) + accounting.surviving_parity_leak();
  return std::min<std::uint64_t>(k, n);
}

void SubsetFamily::for_each(const std::function<void(std::span<const std::uint64_t>)>& visit) const {
  const std::size_t words = (key_length + 63) / 64;
  const std::uint64_t tail_mask = key_length % 64 == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << (key_length % 64)) - 1;
  std::vector<std::uint64_t> mask(words);
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    bool empty = true;
    while (empty) {
      for (std::size_t w = 0; w < words; ++w) mask[w] = rng.next_u64();
      if (words > 0) mask[words - 1] &= tail_mask;
      empty = std::all_of(mask.begin(), mask.end(), [](std::uint64_t x) { return x == 0; });
    }
    visit(mask);
  }
}

std::vector<std::vector<std::size_t>> SubsetFamily::materialize() const {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(count);
  for_each([&](std::span<const std::uint64_t> mask) {
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < key_length; ++i)
      if ((mask[i / 64] >> (i % 64)) & 1u) subset.push_back(i);
    out.push_back(std::move(subset));
  });
  return out;
}

Bitstring apply_subsets(const Bitstring& key, const SubsetFamily& subsets) {
  if (key.size() != subsets.key_length) throw Error(Errc::LengthMismatch, "subset family built for another length");
  std::vector<std::uint64_t> words((key.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < key.size(); ++i)
    if (key[i]) words[i / 64] |= std::uint64_t{1} << (i % 64);

  Bitstring out;
  out.reserve(subsets.count);
  subsets.for_each([&](std::span<const std::uint64_t> mask) {
    int ones = 0;
    for (std::size_t w = 0; w < words.size(); ++w) ones += std::popcount(words[w] & mask[w]);
    out.push_back(static_cast<Bit>(ones & 1));
  });
  return out;
}

AmplifyResult privacy_amplify(const Bitstring& key, std::uint64_t k, std::uint64_t s, Rng& rng,
                              PublicTranscript& transcript) {
  const std::uint64_t n = key.size();
  if (n < k + s + 1) {
    throw Error(Errc::KeyExhausted, "n - k - s < 1 (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                                        ", s=" + std::to_string(s) + ")");
  }
  SubsetFamily family{rng.next_u64(), key.size(), static_cast<std::size_t>(n - k - s)};
  transcript.post(Party::Alice, MessageKind::PrivacySubsets,
                  PayloadWriter().u64(family.seed).varint(family.key_length).varint(family.count).take());
  return {apply_subsets(key, family), family};
}

}  // namespace qkd
