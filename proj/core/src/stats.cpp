#include "heavytail/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "heavytail/errors.hpp"
#include "heavytail/parallel.hpp"

namespace heavytail {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::string Coordinate::label() const {
  return depth == 0 ? "raw" : "log" + std::to_string(depth);
}

void TailEstimate::finalize() {
  const std::size_t k = thresholds.size();
  p_hat.assign(k, 0.0);
  ci_lo.assign(k, 0.0);
  ci_hi.assign(k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (total > 0) p_hat[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    const auto ci = wilson_interval(counts[i], total);
    ci_lo[i] = std::min(ci.lo, p_hat[i]);
    ci_hi[i] = std::max(ci.hi, p_hat[i]);
  }
  ratio.clear();
  if (predicted.size() == k) {
    ratio.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      ratio[i] = predicted[i] > 0.0 ? p_hat[i] / predicted[i]
                                    : std::numeric_limits<double>::quiet_NaN();
    }
  }
}

TailEstimate mc_tail_estimate(const Sampler& sampler,
                              std::span<const double> thresholds,
                              std::uint64_t samples, const SeedPlan& plan,
                              unsigned workers, Exceedance rule,
                              std::uint64_t domain) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    fail(ErrorKind::kDomain, "thresholds must be sorted ascending");
  }
  if (samples < 1) fail(ErrorKind::kDomain, "mc_tail_estimate needs samples >= 1");

  const std::size_t k = thresholds.size();
  std::vector<std::vector<std::uint64_t>> per_shard(shard_count(samples));
  for_each_shard(samples, workers, [&](const ShardRange& shard) {
    RngStream rng = plan.stream(domain, shard.index);
    std::vector<std::uint64_t> local(k, 0);
    for (std::uint64_t i = shard.begin; i < shard.end; ++i) {
      const double x = sampler(rng);
      for (std::size_t t = 0; t < k; ++t) {
        const bool hit = rule == Exceedance::kGreater ? x > thresholds[t]
                                                      : x >= thresholds[t];
        if (!hit) break;
        ++local[t];
      }
    }
    per_shard[shard.index] = std::move(local);
  });

  TailEstimate est;
  est.exceedance = rule;
  est.thresholds.assign(thresholds.begin(), thresholds.end());
  est.counts.assign(k, 0);
  est.total = samples;
  for (const auto& local : per_shard) {
    for (std::size_t t = 0; t < k; ++t) est.counts[t] += local[t];
  }
  est.finalize();
  return est;
}

double kolmogorov_q(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-transformed series, fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double t = std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * c);
      sum += t;
      if (t < 1e-17 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * t;
    if (t < 1e-17 * std::fabs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) {
    fail(ErrorKind::kInsufficientSamples, "ks_two_sample needs two nonempty samples");
  }
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());

  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }

  KsResult r;
  r.statistic = d;
  const double ne = na * nb / (na + nb);
  const double root = std::sqrt(ne);
  r.p_value = kolmogorov_q((root + 0.12 + 0.11 / root) * d);
  return r;
}

TrendReport ratio_convergence_report(std::span<const double> ratios) {
  if (ratios.size() < 4) {
    fail(ErrorKind::kInsufficientData,
         "ratio_convergence_report needs at least 4 usable points");
  }
  TrendReport report;
  report.ratios.assign(ratios.begin(), ratios.end());
  const std::size_t n = ratios.size();
  const std::size_t start = n - (n + 1) / 2;
  report.monotone_tail_flag = true;
  for (std::size_t i = start + 1; i < n; ++i) {
    if (!(std::fabs(ratios[i] - 1.0) < std::fabs(ratios[i - 1] - 1.0))) {
      report.monotone_tail_flag = false;
    }
  }
  report.last_gap = std::fabs(ratios.back() - 1.0);
  return report;
}

TrendReport ratio_convergence_report(const TailEstimate& estimate) {
  std::vector<double> usable;
  for (std::size_t i = 0; i < estimate.ratio.size(); ++i) {
    if (estimate.predicted[i] > 0.0 && std::isfinite(estimate.ratio[i])) {
      usable.push_back(estimate.ratio[i]);
    }
  }
  return ratio_convergence_report(usable);
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> probabilities) {
  if (observed.size() != probabilities.size() || observed.size() < 2) {
    fail(ErrorKind::kInsufficientData,
         "chi-square needs matching bins, at least two of them");
  }
  double n = 0.0;
  for (auto o : observed) n += static_cast<double>(o);
  ChiSquareResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = n * probabilities[i];
    if (!(expected > 0.0)) {
      fail(ErrorKind::kInsufficientData, "chi-square bin with zero expectation");
    }
    const double diff = static_cast<double>(observed[i]) - expected;
    r.statistic += diff * diff / expected;
  }
  r.dof = static_cast<int>(observed.size()) - 1;
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

}  // namespace heavytail
