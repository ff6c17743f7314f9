#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "heavytail/env_model.hpp"
#include "heavytail/extnum.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

/// Lazily materialized environment: A_i is drawn the first time site i is
/// visited and kept for the rest of the walk.
class SiteEnvironment {
 public:
  /// Fresh i.i.d. environment from the spec, drawn from `rng`.
  SiteEnvironment(const EnvironmentSpec& spec, RngStream& rng);
  /// Injected environment (test hook / quenched mode).
  explicit SiteEnvironment(std::function<double(std::int64_t)> a_of_site);

  /// Right-step probability at `site`.
  double a(std::int64_t site);

 private:
  double draw(std::int64_t site);

  const EnvironmentSpec* spec_ = nullptr;
  RngStream* rng_ = nullptr;
  std::function<double(std::int64_t)> injected_;
  std::vector<double> nonneg_;  // sites 0, 1, 2, ...
  std::vector<double> neg_;     // sites -1, -2, ...
};

enum class WalkStop {
  kHitTarget,    // X reached n; T_n is exact
  kStepCap,      // steps_cap reached first
  kRightSumCap,  // sum of U_i over 1..n reached the requested stop value
};

struct WalkOptions {
  std::uint64_t steps_cap = 10'000'000;
  std::uint64_t left_window = 0;
  /// Stop as soon as U_1 + ... + U_n reaches this value. Any statistic that
  /// only depends on min(U_1 + ... + U_n, stop) is then already determined.
  std::optional<std::uint64_t> right_sum_stop;
  /// Replace every excursion to the left of 0 by its (almost sure) return:
  /// a walk at 0 moves on to 1. U_i for i >= 1 keep their law, left_sum and
  /// the window left of 1 stay zero, and T_n becomes n + 2 (U_1 + ... + U_n).
  bool collapse_left_excursions = false;
};

struct WalkRecord {
  std::int64_t n = 0;
  /// Steps taken: T_n when the target was hit, otherwise the step count at
  /// the stop.
  Magnitude t_n;
  /// U_i^{(n)} for i in [-left_window, n]; index 0 is site -left_window.
  std::vector<std::uint64_t> u_counts;
  std::int64_t window_lo = 0;
  /// Sum of U_i over all i <= 0, including sites left of the window.
  std::uint64_t left_sum = 0;
  /// Sum of U_i over 1..n.
  std::uint64_t right_sum = 0;
  bool truncated = false;
  bool left_collapsed = false;
  WalkStop stop = WalkStop::kHitTarget;
  std::uint64_t steps_cap = 0;

  /// U_i^{(n)} at `site`; zero for sites right of n.
  std::uint64_t u_at(std::int64_t site) const;
};

/// Nearest-neighbour walk from 0 with right-step probability A_i at site i,
/// run until it hits n or a stop condition fires.
WalkRecord simulate_walk(SiteEnvironment& env, std::int64_t n,
                         const WalkOptions& options, RngStream& rng);

/// Fresh annealed environment per call; A_i and the steps share `rng`.
WalkRecord simulate_walk(const EnvironmentSpec& spec, std::int64_t n,
                         std::uint64_t steps_cap, std::uint64_t left_window,
                         RngStream& rng);

}  // namespace heavytail
