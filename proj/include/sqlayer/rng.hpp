#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sqlayer {

/// 64-bit FNV-1a. Used to key random streams and to fingerprint configs.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/**
 * A named pseudorandom stream.
 *
 * Each participant and each channel owns its own stream, keyed by the run
 * seed and a label such as "alice" or "channel:bob1:fwd:0". Streams never
 * share state, so inserting an eavesdropper leaves the honest parties'
 * draws untouched. A stream is single-owner: one actor advances it.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string stream_id)
      : seed_(seed),
        stream_id_(std::move(stream_id)),
        engine_(splitmix64(seed ^ fnv1a64(stream_id_))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& stream_id() const noexcept { return stream_id_; }
  std::uint64_t draws() const noexcept { return draws_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Rejection sampling, so exactly unbiased.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    ++draws_;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::string stream_id_;
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace sqlayer
