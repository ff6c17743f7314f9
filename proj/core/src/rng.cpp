#include "heavytail/rng.hpp"

#include <array>

namespace heavytail {

namespace {

constexpr std::uint32_t kStreamTag = 0x68747270u;  // "htrp"

std::uint32_t lo(std::uint64_t x) { return static_cast<std::uint32_t>(x); }
std::uint32_t hi(std::uint64_t x) {
  return static_cast<std::uint32_t>(x >> 32);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t domain,
                     std::uint64_t index) {
  const std::array<std::uint32_t, 7> words{
      kStreamTag,     lo(master_seed), hi(master_seed), lo(domain),
      hi(domain),     lo(index),       hi(index)};
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::uint64_t RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

}  // namespace heavytail
