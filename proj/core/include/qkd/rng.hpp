#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace qkd {

/// Seeded random source shared by every sampling operation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. All derived quantities (uniform doubles, bounded integers,
/// shuffles) are computed here rather than through <random> distributions,
/// whose algorithms are implementation-defined. Equal seeds therefore give
/// equal draw sequences on every conforming platform.
///
///   uniform()   = (next_u64() >> 11) * 2^-53, in [0, 1)
///   coin()      = top bit of next_u64()
///   below(n)    = rejection sampling on next_u64(), unbiased
///   shuffle     = Fisher-Yates from the back, j = below(i + 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool coin() { return (next_u64() >> 63) != 0; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qkd
