#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ppconv {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_stream_id(std::uint64_t parent, std::uint64_t key) noexcept {
  return mix64(mix64(parent) ^ (key * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL));
}

/// Names one independent random stream: a master seed plus a stream id.
/// Child streams are derived by hashing, so a tree of streams can be
/// handed out to particles, strips and replicates without coordination.
struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  constexpr RngStream child(std::uint64_t key) const noexcept {
    return {master_seed, derive_stream_id(stream_id, key)};
  }

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;
};

/// Engine bound to one RngStream.
///
/// std::mt19937_64 and std::seed_seq have fully specified output, but the
/// standard distributions do not, so the variate transforms below are written
/// out to keep draws identical across standard libraries.
class Rng {
 public:
  explicit Rng(const RngStream& stream) {
    const std::uint64_t a = stream.master_seed;
    const std::uint64_t b = stream.stream_id;
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  // Box-Muller, cosine branch only; no cached state.
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    return r * std::cos(2.0 * std::numbers::pi * uniform01());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ppconv
