#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace seqknock {

/// A reproducible random stream addressed by `(seed, stream_id)`.
///
/// The engine is std::mt19937_64 seeded through std::seed_seq with the four
/// 32-bit halves of seed and stream id. Both algorithms are pinned down by the
/// standard, so a given address yields the same sequence on every platform and
/// under every thread schedule. seed_seq avalanches every input word into every
/// state word, so neighbouring stream ids start from unrelated engine states;
/// with a 2^19937 period the chance of two substreams overlapping within any
/// realistic draw budget is negligible.
///
/// Uniform, normal and integer variates are derived here rather than through
/// the std distributions, whose output is implementation-defined.
///
/// Streams are cheap to copy but must not be shared between concurrent tasks.
class SeededStream {
 public:
  /// Low bits of a stream id reserved for the knockoff draw index.
  static constexpr unsigned kDrawBits = 20;

  SeededStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32)};
    engine_.seed(seq);
  }

  /// Stream for knockoff draw `draw` of replicate `replicate`: id = replicate * 2^20 + draw.
  static SeededStream for_draw(std::uint64_t seed, std::uint64_t replicate, std::uint64_t draw) {
    return SeededStream(seed, (replicate << kDrawBits) + draw);
  }

  /// Independent substream keyed by `tag`. Depends only on this stream's
  /// address, never on how many values were already consumed.
  [[nodiscard]] SeededStream child(std::uint64_t tag) const {
    return SeededStream(mix(seed_ ^ mix(stream_id_ + 0x632be59bd9b4e019ULL)), tag);
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u = 0.0;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t index(std::uint64_t n) {
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    shuffle(perm.begin(), perm.end());
    return perm;
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finaliser
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace seqknock
