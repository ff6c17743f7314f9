#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "heavytail/rng.hpp"

namespace heavytail {

/// Two-sided 99% normal quantile used for every Wilson interval.
inline constexpr double kWilsonZ99 = 2.5758293035489004;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double z = kWilsonZ99);

/// Axis on which thresholds are expressed: depth 0 is the raw value, depth d
/// is log^{(d)} of it.
struct Coordinate {
  int depth = 0;

  std::string label() const;
  friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

/// How a threshold counts as exceeded.
enum class Exceedance { kGreater, kGreaterEqual };

struct TailEstimate {
  /// Free-form tag for the arm that produced the numbers ("walk", "bpre").
  std::string arm;
  Coordinate coordinate;
  Exceedance exceedance = Exceedance::kGreater;
  std::vector<double> thresholds;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::vector<double> p_hat;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::vector<double> predicted;
  std::vector<double> ratio;

  /// Fills p_hat, the Wilson 99% bounds and (when predictions are present)
  /// the ratios from counts and total.
  void finalize();
};

using Sampler = std::function<double(RngStream&)>;

/// Exceedance counts of `samples` draws against sorted thresholds. Draws are
/// grouped into fixed shards, shard s using stream (domain, s); counts merge
/// by integer addition, so the result does not depend on `workers`.
TailEstimate mc_tail_estimate(const Sampler& sampler,
                              std::span<const double> thresholds,
                              std::uint64_t samples, const SeedPlan& plan,
                              unsigned workers,
                              Exceedance rule = Exceedance::kGreater,
                              std::uint64_t domain = domain::kTail);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1}
/// e^{-2 k^2 lambda^2}.
double kolmogorov_q(double lambda);

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value
/// (effective-size corrected argument (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) D).
KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys);

struct TrendReport {
  std::vector<double> ratios;
  /// |ratio - 1| strictly decreasing over the final half of the grid.
  bool monotone_tail_flag = false;
  double last_gap = 0.0;
};

TrendReport ratio_convergence_report(std::span<const double> ratios);
/// Uses the thresholds of `estimate` with a positive prediction.
TrendReport ratio_convergence_report(const TailEstimate& estimate);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson chi-square of observed counts against expected probabilities
/// (which must sum to one across the bins).
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> probabilities);

}  // namespace heavytail
