#include "gnncert/rng.hpp"

#include <cmath>
#include <numbers>

namespace gnncert {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng::result_type CounterRng::operator()() noexcept {
  const std::uint64_t base = key_ ^ splitmix64(stream_);
  return splitmix64(base + counter_++ * 0x9E3779B97F4A7C15ULL);
}

CounterRng CounterRng::split(std::uint64_t child) const noexcept {
  return CounterRng(splitmix64(key_ ^ splitmix64(stream_ + 0x632BE59BD9B4E019ULL)), child);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % n;
}

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace gnncert
