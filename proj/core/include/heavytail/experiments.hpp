#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "heavytail/env_model.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/stats.hpp"

namespace heavytail {

struct KsReport {
  int n = 0;
  std::uint64_t samples = 0;
  /// Common cap C applied to both sides.
  std::uint64_t cap = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  /// Fraction of walks that hit steps_cap before their capped value was
  /// determined; those walks are left out of the comparison.
  double truncation_rate = 0.0;
  std::uint64_t walk_used = 0;
  std::uint64_t bpre_used = 0;
};

/// Two-sample KS between min(U_1 + ... + U_n, C) over fresh annealed walks
/// and min(Z_0 + ... + Z_{n-1}, C) over fresh BPRE trajectories, with
/// C = floor((steps_cap - n) / 2), the largest value of U_1 + ... + U_n a
/// walk finishing within steps_cap can produce. With `collapse_left` the
/// walks skip their excursions left of 0 (see WalkOptions), which leaves
/// U_1..U_n unchanged in law and makes truncation impossible. `bpre_spec`,
/// when given, replaces the environment of the BPRE side (negative
/// controls). Throws InsufficientSamples when more than half of the walks
/// are unresolved.
KsReport check_distributional_identity(const EnvironmentSpec& spec, int n,
                                       std::uint64_t samples,
                                       std::uint64_t steps_cap,
                                       const SeedPlan& plan, unsigned workers,
                                       bool collapse_left = true,
                                       const EnvironmentSpec* bpre_spec = nullptr);

enum class ExperimentKind { kZ1, kZl, kTn, kIdentity };
enum class Z1Method { kMonteCarlo, kQuadrature, kPredict };

struct ExperimentRequest {
  ExperimentKind kind = ExperimentKind::kZ1;
  /// l for kZl, n for kTn and kIdentity.
  int index = 1;
  Z1Method method = Z1Method::kMonteCarlo;
  /// Only read by kZ1: raw m (depth 0) or ln m (depth 1). kZl uses depth l,
  /// kTn depth n - 1.
  Coordinate coordinate;
  std::vector<double> thresholds;
  std::uint64_t samples = 100'000;
  std::uint64_t steps_cap = 1'000'000;
  double rel_tol = 1e-10;
  unsigned workers = 1;
  /// Walk arms (kTn, kIdentity) skip excursions left of 0.
  bool collapse_left_excursions = true;
};

struct ExperimentResult {
  std::vector<TailEstimate> tails;
  std::optional<KsReport> ks;
  double truncation_rate = 0.0;
  /// Non-truncated walks violating T_n = n + 2 sum_i U_i (always expected 0).
  std::uint64_t identity_failures = 0;
};

ExperimentResult run_theorem_experiment(const ExperimentRequest& request,
                                        const EnvironmentSpec& spec,
                                        const SeedPlan& plan);

}  // namespace heavytail
