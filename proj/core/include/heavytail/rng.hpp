#pragma once

#include <cstdint>
#include <random>

namespace heavytail {

/// A private random stream owned by exactly one worker.
///
/// Streams are identified by (master seed, domain, index). The three words
/// are split into 32-bit halves, prefixed with a fixed tag and fed through
/// std::seed_seq, whose output initializes a 64-bit Mersenne Twister. Two
/// streams differing in any coordinate therefore start from unrelated
/// states, and a stream's output never depends on how many workers exist.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t domain,
            std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();
  double gamma(double shape);
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Deterministic assignment of streams to shards of an experiment.
struct SeedPlan {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_count = 0;

  RngStream stream(std::uint64_t domain, std::uint64_t index) const {
    return RngStream(master_seed, domain, index);
  }
};

/// Stream domains keep the arms of one experiment apart.
namespace domain {
inline constexpr std::uint64_t kEnvironment = 1;
inline constexpr std::uint64_t kBpre = 2;
inline constexpr std::uint64_t kWalk = 3;
inline constexpr std::uint64_t kTail = 4;
inline constexpr std::uint64_t kControl = 5;
}  // namespace domain

}  // namespace heavytail
