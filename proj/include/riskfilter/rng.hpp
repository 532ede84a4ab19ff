#pragma once

#include <cstdint>
#include <random>

namespace riskfilter {

// Counter-friendly 64-bit generator (SplitMix64). Cheap to seed, so each
// particle can get its own stream derived from (seed, epoch, index) and
// parallel propagation stays bit-identical to serial.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  // One SplitMix64 output step keyed by a ^ rotated b; good enough to
  // decorrelate derived stream seeds.
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

template <class Urbg>
double uniform01(Urbg& g) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

template <class Urbg>
double normal01(Urbg& g) {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(g);
}

// One shared generator per consumer (ground truth / particle filter), split
// into a sequential stream plus counter-based per-particle substreams.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), seq_(mix64(seed, 0x5eedull)) {}

  std::uint64_t seed() const { return seed_; }

  // Sequential draws (resampling offsets, measurement noise, initial sampling).
  SplitMix64& sequential() { return seq_; }

  // Stream for particle `index` in the current epoch. Identical regardless of
  // the order particles are visited in.
  SplitMix64 substream(std::uint64_t index) const {
    return SplitMix64(mix64(mix64(seed_, epoch_ + 1), index));
  }

  // Advance the epoch after a propagation sweep so the next sweep gets fresh streams.
  void bump_epoch() { ++epoch_; }
  std::uint64_t epoch() const { return epoch_; }

private:
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  SplitMix64 seq_;
};

}  // namespace riskfilter
