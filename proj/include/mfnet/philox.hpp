#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mfnet {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Stateless: output is a pure function of (key, counter).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

inline constexpr Philox4x32::Key philox_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Two 53-bit uniforms from one Philox block. `open` is in (0,1], `closed` in [0,1).
struct UniformPair {
  double open;
  double closed;
};

inline UniformPair uniform_pair(const Philox4x32::Counter& ctr, const Philox4x32::Key& key) {
  const auto out = Philox4x32::generate(ctr, key);
  const std::uint64_t a = (std::uint64_t{out[0]} << 32) | out[1];
  const std::uint64_t b = (std::uint64_t{out[2]} << 32) | out[3];
  constexpr double kScale = 0x1.0p-53;
  return {static_cast<double>((a >> 11) + 1) * kScale, static_cast<double>(b >> 11) * kScale};
}

/// SplitMix64 finalizer; used to derive replica seeds and hash identifiers.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag + 0x632BE59BD9B4E019ull));
}

// Counter-based generator for sequential draws keyed by a stream tag.
// Used for test oracles and Monte Carlo references; not for PRM streams.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(philox_key(seed)), stream_(stream) {}

  /// Uniform on the open interval (0,1).
  double uniform() {
    if (buffered_) {
      buffered_ = false;
      return spare_;
    }
    const auto pair = uniform_pair(
        {static_cast<std::uint32_t>(count_), static_cast<std::uint32_t>(count_ >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        key_);
    ++count_;
    spare_ = pair.closed + 0x1.0p-54;
    buffered_ = true;
    return pair.open - 0x1.0p-54;
  }

  double normal() {
    // Box-Muller, one variate per call.
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t count_ = 0;
  double spare_ = 0.0;
  bool buffered_ = false;
};

}  // namespace mfnet
