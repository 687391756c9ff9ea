#pragma once

#include <cstdint>

namespace rpf {

// Counter-based random bits: every draw is a pure function of
// (seed, domain, a, b), so results do not depend on evaluation order or
// on how work is split across threads.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream domains keep unrelated draws (design entries, X, X', noise)
/// statistically independent for the same user seed.
enum class Stream : std::uint64_t {
  DesignEntry = 1,
  ExpanderColumn = 2,
  InputX = 3,
  InputXPrime = 4,
  UdpSearch = 5,
  Refit = 6,
  Noise = 7,
};

inline constexpr std::uint64_t counter_bits(std::uint64_t seed, Stream domain,
                                            std::uint64_t a,
                                            std::uint64_t b) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(domain));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ (b * 0xd1342543de82ef95ULL));
}

/// Uniform double in [0, 1) with 53 random bits.
inline constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline constexpr double counter_uniform(std::uint64_t seed, Stream domain,
                                        std::uint64_t a,
                                        std::uint64_t b) noexcept {
  return to_unit(counter_bits(seed, domain, a, b));
}

/// Sequential generator over one (seed, domain, stream) triple. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, Stream domain, std::uint64_t stream) noexcept
      : seed_(seed), domain_(domain), stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    return counter_bits(seed_, domain_, stream_, counter_++);
  }

  double uniform() noexcept { return to_unit((*this)()); }

  /// Uniform integer in [0, bound) by rejection, bias-free.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t seed_;
  Stream domain_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace rpf
