#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace osmcaa {

// Deterministic counter-based generator built on SplitMix64: the state walks
// the golden-ratio sequence and each output is a bijective mix of the state
// (Steele/Lea/Flood variant with the 0xbf58476d / 0x94d049bb multipliers).
// The integer stream depends only on the seed and the call sequence, so runs
// reproduce exactly on any platform. Sub-streams are derived from
// (origin seed, task tag) and never overlap with the parent stream in
// practice because the tag hash is mixed through the full finalizer.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); bias removed by rejection below the largest
  // multiple of n.
  std::uint64_t next_index(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (max % n + 1) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next_u64();
      if (rem == 0 || x <= max - rem) return x % n;
    }
  }

  // Standard normal via Box-Muller; the spare draw is cached so one call
  // consumes one normal from the stream.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derived stream for a sub-task. Depends only on (origin seed, tag), not
  // on how much of this stream has been consumed.
  Rng split(std::string_view tag) const {
    return Rng(mix(seed_ ^ mix(fnv1a64(tag))));
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    return h;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace osmcaa
