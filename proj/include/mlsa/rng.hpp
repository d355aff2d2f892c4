#ifndef MLSA_RNG_HPP
#define MLSA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace mlsa {

/// Seedable, splittable generator (splitmix64 core). Forked streams are
/// derived from the original seed plus a tag, never from mutable state,
/// so the same (seed, tag) pair always yields the same stream regardless
/// of how much the parent has been consumed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Integer in [0, n), n > 0.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double next_normal() {
    double u = next_unit();
    double v = next_unit();
    while (u <= 0.0) u = next_unit();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
  }

  Rng fork(std::string_view tag) const { return Rng(mix(seed_, hash_str(tag))); }
  Rng fork(std::string_view tag, std::uint64_t a) const {
    return Rng(mix(mix(seed_, hash_str(tag)), a));
  }
  Rng fork(std::string_view tag, std::uint64_t a, std::uint64_t b) const {
    return Rng(mix(mix(mix(seed_, hash_str(tag)), a), b));
  }

  std::uint64_t seed() const { return seed_; }

private:
  static std::uint64_t hash_str(std::string_view s) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_;
};

} // namespace mlsa

#endif
