#pragma once

#include <cmath>
#include <cstdint>

namespace roughmdp {

namespace detail {

// Philox4x32-10 round. Counter-based: the generator is a pure function of
// (key, counter), so substreams can be handed out by value and consumed in
// any order on any number of threads without coordination.
struct PhiloxState {
  std::uint32_t c0, c1, c2, c3;
  std::uint32_t k0, k1;
};

inline void philox_round(PhiloxState& s) {
  const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * s.c0;
  const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * s.c2;
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  s = PhiloxState{hi1 ^ s.c1 ^ s.k0, lo1, hi0 ^ s.c3 ^ s.k1, lo0,
                  s.k0 + 0x9E3779B9u, s.k1 + 0xBB67AE85u};
}

inline void philox10(std::uint32_t counter[4], std::uint32_t key0, std::uint32_t key1,
                     std::uint32_t out[4]) {
  PhiloxState s{counter[0], counter[1], counter[2], counter[3], key0, key1};
  for (int r = 0; r < 10; ++r) philox_round(s);
  out[0] = s.c0;
  out[1] = s.c1;
  out[2] = s.c2;
  out[3] = s.c3;
}

} // namespace detail

/// One independent random substream, keyed by (seed, stream_a, stream_b).
/// Identical keys reproduce the identical sequence bit-for-bit; distinct
/// keys give statistically independent streams. Gaussians come from an
/// explicit Box-Muller so the output does not depend on the standard
/// library's normal_distribution implementation.
class RandomSubstream {
public:
  /// stream_b must fit in 32 bits (it indexes coordinates / small enums).
  RandomSubstream(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        id0_(static_cast<std::uint32_t>(stream_a)),
        id1_(static_cast<std::uint32_t>(stream_a >> 32)),
        id2_(static_cast<std::uint32_t>(stream_b)) {}

  std::uint64_t next_u64() {
    if (block_pos_ == 2) refill();
    return block_[block_pos_++];
  }

  /// Uniform in [0, 1), 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so log(u1) is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  void refill() {
    std::uint32_t ctr[4] = {block_index_, id0_, id1_, id2_};
    std::uint32_t out[4];
    detail::philox10(ctr, key0_, key1_, out);
    block_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    block_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    block_pos_ = 0;
    ++block_index_;
  }

  std::uint32_t key0_, key1_;
  std::uint32_t id0_, id1_, id2_;
  std::uint32_t block_index_ = 0;
  std::uint64_t block_[2] = {0, 0};
  int block_pos_ = 2;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace roughmdp
