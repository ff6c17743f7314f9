#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace heavytail {

/// Samples per shard. Shard boundaries depend only on the sample count, so
/// per-shard results merged in shard order are independent of the number of
/// workers.
inline constexpr std::uint64_t kShardSize = 1u << 14;

struct ShardRange {
  std::uint64_t index;
  std::uint64_t begin;
  std::uint64_t end;
  std::uint64_t size() const { return end - begin; }
};

inline std::uint64_t shard_count(std::uint64_t samples) {
  return (samples + kShardSize - 1) / kShardSize;
}

inline ShardRange shard_range(std::uint64_t samples, std::uint64_t index) {
  const std::uint64_t begin = index * kShardSize;
  return {index, begin, std::min(samples, begin + kShardSize)};
}

/// Runs fn(ShardRange) for every shard of `samples` on up to `workers`
/// threads. Shards are claimed through an atomic counter; fn must write only
/// to storage owned by its shard. The first exception (lowest shard index)
/// is rethrown after all workers join.
template <class Fn>
void for_each_shard(std::uint64_t samples, unsigned workers, Fn&& fn) {
  const std::uint64_t shards = shard_count(samples);
  if (shards == 0) return;
  workers = std::max(1u, workers);
  const auto threads =
      static_cast<unsigned>(std::min<std::uint64_t>(workers, shards));

  std::vector<std::exception_ptr> errors(shards);
  std::atomic<std::uint64_t> next{0};
  auto body = [&] {
    for (std::uint64_t s = next.fetch_add(1); s < shards;
         s = next.fetch_add(1)) {
      try {
        fn(shard_range(samples, s));
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };

  if (threads == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(body);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace heavytail
