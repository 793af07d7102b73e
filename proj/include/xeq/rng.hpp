#pragma once

#include <cstdint>

namespace xeq {

// SplitMix64 finalizer. Public so tests and other language ports can
// reproduce streams bit for bit.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based random stream. Word i of stream s under seed q is the pure
// function
//
//   key     = splitmix64(splitmix64(q) ^ (0x9E3779B97F4A7C15 * (s + 1)))
//   word(i) = splitmix64(key + 0x9E3779B97F4A7C15 * i)
//
// so any (seed, stream) pair yields an independent substream with no shared
// state, and trials or respondents drawn from distinct streams are
// order-independent. Uniforms take the top 53 bits; normals use Box-Muller
// on exactly two consecutive words:
//
//   u1 = uniform(word(2t)),  u2 = uniform(word(2t + 1))
//   z  = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
//
// 1 - u1 lies in (2^-53, 1], keeping the log finite.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(splitmix64(splitmix64(seed) ^
                        (0x9E3779B97F4A7C15ULL * (stream + 1)))) {}

  std::uint64_t next_u64() {
    return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++);
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_normal();

  std::uint64_t words_consumed() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace xeq
