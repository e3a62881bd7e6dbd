#ifndef CUMDIFF_RANDOM_HPP_
#define CUMDIFF_RANDOM_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace cumdiff {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2,
// 3", SC11). Counter-based: the output is a pure function of (counter, key),
// so any draw can be regenerated independently of scheduling.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr const char* algorithm = "philox4x32-10";

  static constexpr Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// A keyed family of substreams. Draw `index` of substream `stream` under
/// `seed` is Philox(counter = (index, stream), key = seed).
class CounterStream {
 public:
  constexpr CounterStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  constexpr Philox4x32::Counter raw(std::uint64_t index) const {
    return Philox4x32::block({static_cast<std::uint32_t>(index),
                              static_cast<std::uint32_t>(index >> 32),
                              static_cast<std::uint32_t>(stream_),
                              static_cast<std::uint32_t>(stream_ >> 32)},
                             key_);
  }

  // Two independent uniforms in the open interval (0, 1), 52 bits each.
  std::array<double, 2> uniforms(std::uint64_t index) const {
    const auto r = raw(index);
    return {to_open_unit(r[0], r[1]), to_open_unit(r[2], r[3])};
  }

  // Two independent standard normals (Box-Muller).
  std::array<double, 2> normals(std::uint64_t index) const {
    const auto [u1, u2] = uniforms(index);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  std::uint64_t stream() const { return stream_; }

 private:
  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    // (k + 1/2) / 2^52 is exact for every 52-bit k and never reaches 0 or 1.
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 12;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
};

}  // namespace cumdiff

#endif  // CUMDIFF_RANDOM_HPP_
