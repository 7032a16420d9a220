#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace depbench::rng {

// splitmix64 step; also the 64-bit mix used for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

inline std::uint64_t hash_string(std::string_view s) {
  // FNV-1a, then one splitmix round to spread low-entropy ids.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t st = h;
  return splitmix64(st);
}

// Replicate-level seed derivation:
//   seed = H(master, function_id, model_id, r2_index, replicate_index)
// chained through the splitmix64 mix so streams are independent of the
// order in which work items are executed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view a,
                                 std::uint64_t b = 0, std::uint64_t c = 0,
                                 std::uint64_t d = 0) {
  std::uint64_t s = mix(master, hash_string(a));
  s = mix(s, b);
  s = mix(s, c);
  s = mix(s, d);
  return s;
}

// xoshiro256** by Blackman & Vigna (public domain reference implementation),
// chosen for cross-platform bit-reproducibility; std:: distributions are
// implementation-defined and must not be used anywhere results are frozen.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53 significant bits.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0,1); safe as a log() argument.
  double next_open_double() {
    double u;
    do {
      u = next_double();
    } while (u == 0.0);
    return u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller; a spare is cached so consecutive calls consume uniforms in a
  // fixed, documented order.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_open_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, bound) via rejection; unbiased.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace depbench::rng
