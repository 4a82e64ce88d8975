#pragma once

#include <cstdint>
#include <random>

namespace renass {

/// Uniform doubles in [0, 1) from the top 53 bits of a 64-bit Mersenne
/// Twister, so streams are identical across standard libraries. The seed
/// goes through seed_seq; raw consecutive seeds gave correlated streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
  }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const auto k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

}  // namespace renass
