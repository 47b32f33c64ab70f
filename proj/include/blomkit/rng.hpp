#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace blomkit {

/// The one random source used throughout the library.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
/// maps draws onto ranges by rejection sampling so results are identical on
/// every standard library. kGeneratorId is written into exported metadata.
class Rng {
 public:
  static constexpr std::string_view kGeneratorId = "mt19937_64+rejection";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform value in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return mix64(mix64(mix64(seed) ^ a) ^ b);
}

}  // namespace blomkit
