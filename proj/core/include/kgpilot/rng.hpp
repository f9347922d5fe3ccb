#pragma once

#include <array>
#include <cstdint>

namespace kgpilot {

/// Counter-based pseudo-random generator (Philox4x32-10). A generator is
/// keyed by (seed, stream); distinct streams are statistically independent,
/// so parallel consumers each take their own stream index and the combined
/// output is independent of scheduling. Draws are reproducible across
/// platforms: the generator is pure integer arithmetic.
///
/// Stream-allocation convention used by this library:
///   - ensemble sampling: stream = sample index
///   - Monte Carlo integration: stream = chunk index
///   - equivariance pointwise probes: stream = 2^63 + probe index
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  /// Next 64 uniformly distributed bits.
  std::uint64_t next_u64() {
    if (have_ == 0) refill();
    have_ -= 2;
    const std::uint64_t lo = buf_[static_cast<std::size_t>(have_)];
    const std::uint64_t hi = buf_[static_cast<std::size_t>(have_ + 1)];
    return (hi << 32) | lo;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// One Philox4x32-10 block; exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                                 std::array<std::uint32_t, 2> key) {
    round_once(counter, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
      round_once(counter, key);
    }
    return counter;
  }

 private:
  static void round_once(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = 0xD2511F53ull * c[0];
    const std::uint64_t p1 = 0xCD9E8D57ull * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  void refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    buf_ = philox4x32(ctr, key_);
    ++block_;
    have_ = 4;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_{0};
  std::array<std::uint32_t, 4> buf_{};
  int have_{0};
};

}  // namespace kgpilot
