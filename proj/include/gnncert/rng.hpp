#pragma once

#include <cstdint>
#include <limits>

namespace gnncert {

/// Counter-based 64-bit generator. Output k of stream s under key is
/// splitmix64(key ⊕ splitmix64(s) + k·φ), so any (key, stream) pair can be
/// addressed independently and generation order never matters.
///
/// Streams are split explicitly: `split(i)` derives a child stream whose key
/// mixes the parent key and stream id, e.g. one child per graph index.
/// Satisfies UniformRandomBitGenerator, but all library sampling goes through
/// the member helpers so results do not depend on the standard library's
/// distribution implementations.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t stream = 0) noexcept
      : key_(key), stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  CounterRng split(std::uint64_t child) const noexcept;

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer in [0, n), n > 0 (rejection sampling, unbiased).
  std::uint64_t below(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Standard normal via Box–Muller; the second deviate is cached.
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace gnncert
