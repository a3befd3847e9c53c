#pragma once

#include <cstdint>
#include <random>

namespace pfloc {

// Purpose tags keep independent consumers of one (seed, frame) pair apart.
enum class StreamPurpose : std::uint64_t {
  kPoseNoise = 1,
  kSegmentationNoise = 2,
  kInitialise = 3,
  kPredict = 4,
  kResample = 5,
  kGeneric = 6,
};

/// Seeded 64-bit Mersenne Twister with the few draw shapes the library needs.
///
/// Streams are split by key rather than by sharing a generator: derive() hashes
/// (seed, frame, purpose, sub-id) so that adding or removing a consumer never
/// shifts the draws of another.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream derive(std::uint64_t seed, std::uint64_t frame, StreamPurpose purpose,
                             std::uint64_t sub = 0);

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  long long uniform_int(long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(engine_);
  }
  bool bernoulli(double p) { return uniform01() < p; }
  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pfloc
