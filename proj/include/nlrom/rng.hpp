// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_RNG_HPP
#define NLROM_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace nlrom {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is
// addressed by (seed, stream, index), so parallel producers get identical
// numbers regardless of scheduling. The key is the 64-bit seed; the 128-bit
// counter carries (stream, index).
class Philox {
 public:
  static std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t stream,
                                            std::uint64_t index) {
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    std::array<std::uint32_t, 4> x = {
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return x;
  }

  // Two 64-bit words per block.
  static std::array<std::uint64_t, 2> block64(std::uint64_t seed, std::uint64_t stream,
                                              std::uint64_t index) {
    const auto b = block(seed, stream, index);
    return {(static_cast<std::uint64_t>(b[1]) << 32) | b[0],
            (static_cast<std::uint64_t>(b[3]) << 32) | b[2]};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

inline double u64_to_unit_double(std::uint64_t v) {
  // 53 high bits -> [0, 1)
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

/// Uniform double in [0,1) at counter address (seed, stream, index).
inline double uniform01_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return u64_to_unit_double(Philox::block64(seed, stream, index)[0]);
}

/// Standard normal at counter address (seed, stream, index). Box-Muller on one block.
inline double normal_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const auto w = Philox::block64(seed, stream, index);
  // u1 in (0, 1] so the log is finite.
  const double u1 = static_cast<double>((w[0] >> 11) + 1) * 0x1.0p-53;
  const double u2 = u64_to_unit_double(w[1]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Stateful convenience wrapper over a single (seed, stream) pair.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() { return Philox::block64(seed_, stream_, index_++)[0]; }
  double uniform01() { return u64_to_unit_double(next_u64()); }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  double normal() { return normal_at(seed_, stream_, index_++); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
};

}  // namespace nlrom

#endif  // NLROM_RNG_HPP
