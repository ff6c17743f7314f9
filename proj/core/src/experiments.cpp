#include "heavytail/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heavytail/asymptotics.hpp"
#include "heavytail/bpre.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/rwre.hpp"

namespace heavytail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// log applied `times` more times to a value that is already ln(x).
double further_logs(double ln_x, int times) {
  double cur = ln_x;
  for (int i = 0; i < times; ++i) {
    if (!(cur > 1.0)) return kNegInf;
    cur = std::log(cur);
  }
  return cur;
}

void require_sorted(const std::vector<double>& thresholds) {
  if (thresholds.empty()) fail(ErrorKind::kDomain, "threshold grid is empty");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    fail(ErrorKind::kDomain, "thresholds must be sorted ascending");
  }
}

Magnitude raw_threshold(const Coordinate& c, double t) {
  if (c.depth == 0) {
    if (!(t >= 0.0)) fail(ErrorKind::kDomain, "raw thresholds must be >= 0");
    return Magnitude::log_scale(std::log(t));
  }
  return exp_iterated(t, c.depth);
}

TailEstimate run_z1(const ExperimentRequest& req, const EnvironmentSpec& spec,
                    const SeedPlan& plan) {
  const Coordinate coord = req.coordinate;
  if (coord.depth > 1) {
    fail(ErrorKind::kDomain, "Z1 thresholds are raw m or ln m");
  }
  std::vector<double> predicted;
  for (double t : req.thresholds) {
    const double ln_m = coord.depth == 0 ? std::log(t) : t;
    predicted.push_back(ln_m > 1.0
                            ? predicted_tail_z1(spec, Magnitude::log_scale(ln_m))
                            : 0.0);
  }

  TailEstimate est;
  if (req.method == Z1Method::kMonteCarlo) {
    // Raw coordinate counts Z_1 >= m; log coordinate counts ln Z_1 >= y,
    // the same event for m = e^y.
    Sampler sampler = [&spec, coord](RngStream& rng) {
      const auto law = OffspringLaw::from_v(sample_v(spec, rng));
      const Magnitude z = sample_geometric(law, rng.uniform());
      return coord.depth == 0 ? z.to_double() : mag_ln(z);
    };
    est = mc_tail_estimate(sampler, req.thresholds, req.samples, plan,
                           req.workers, Exceedance::kGreaterEqual, domain::kTail);
    est.predicted = predicted;
    est.finalize();
  } else {
    est.exceedance = Exceedance::kGreaterEqual;
    est.thresholds = req.thresholds;
    est.predicted = predicted;
    const std::size_t k = req.thresholds.size();
    est.counts.assign(k, 0);
    est.total = 0;
    est.p_hat.assign(k, kNaN);
    est.ci_lo.assign(k, kNaN);
    est.ci_hi.assign(k, kNaN);
    est.ratio.assign(k, kNaN);
    if (req.method == Z1Method::kQuadrature) {
      for (std::size_t i = 0; i < k; ++i) {
        const double t = req.thresholds[i];
        const Magnitude m = coord.depth == 0 && t == 0.0
                                ? Magnitude::exact(0)
                                : raw_threshold(coord, t);
        const double p = z1_tail_quadrature(spec, m, req.rel_tol);
        est.p_hat[i] = est.ci_lo[i] = est.ci_hi[i] = p;
        if (predicted[i] > 0.0) est.ratio[i] = p / predicted[i];
      }
    }
  }
  est.arm = req.method == Z1Method::kMonteCarlo   ? "mc"
            : req.method == Z1Method::kQuadrature ? "quadrature"
                                                  : "predict";
  est.coordinate = coord;
  return est;
}

TailEstimate run_zl(const ExperimentRequest& req, const EnvironmentSpec& spec,
                    const SeedPlan& plan) {
  const int l = req.index;
  if (l < 2) fail(ErrorKind::kDomain, "Zl experiments need l >= 2");
  Sampler sampler = [&spec, l](RngStream& rng) {
    return further_logs(sample_log_zl(spec, l, rng), l - 1);
  };
  TailEstimate est = mc_tail_estimate(sampler, req.thresholds, req.samples,
                                      plan, req.workers, Exceedance::kGreater,
                                      domain::kBpre);
  for (double y : req.thresholds) {
    est.predicted.push_back(y > 1.0 ? predicted_tail_zl(spec, l, y) : 0.0);
  }
  est.finalize();
  est.arm = "bpre";
  est.coordinate = Coordinate{l};
  return est;
}

struct WalkArm {
  TailEstimate estimate;
  std::uint64_t truncated = 0;
  std::uint64_t identity_failures = 0;
};

WalkArm run_tn_walk_arm(const ExperimentRequest& req,
                        const EnvironmentSpec& spec, const SeedPlan& plan) {
  const int n = req.index;
  const int depth = n - 1;
  const std::uint64_t cap_value = (req.steps_cap - static_cast<std::uint64_t>(n)) / 2;

  // The walk may stop once U_1 + ... + U_n exceeds every threshold.
  const Magnitude top = exp_iterated(req.thresholds.back(), depth);
  const double top_raw = top.to_double();
  if (!(top_raw + 1.0 < static_cast<double>(cap_value))) {
    fail(ErrorKind::kDomain,
         "largest Tn threshold implies a raw scale beyond steps_cap; lower "
         "the threshold or raise steps_cap");
  }
  WalkOptions options;
  options.steps_cap = req.steps_cap;
  options.right_sum_stop = static_cast<std::uint64_t>(std::floor(top_raw)) + 1;
  options.collapse_left_excursions = req.collapse_left_excursions;

  const std::size_t k = req.thresholds.size();
  struct ShardOut {
    std::vector<std::uint64_t> counts;
    std::uint64_t truncated = 0;
    std::uint64_t failures = 0;
  };
  std::vector<ShardOut> out(shard_count(req.samples));
  for_each_shard(req.samples, req.workers, [&](const ShardRange& shard) {
    RngStream rng = plan.stream(domain::kWalk, shard.index);
    ShardOut local;
    local.counts.assign(k, 0);
    for (std::uint64_t i = shard.begin; i < shard.end; ++i) {
      SiteEnvironment env(spec, rng);
      const WalkRecord rec = simulate_walk(env, n, options, rng);
      if (rec.stop == WalkStop::kStepCap) {
        ++local.truncated;
        continue;
      }
      if (rec.stop == WalkStop::kHitTarget &&
          rec.t_n.exact_value() != static_cast<std::uint64_t>(n) +
                                       2 * (rec.left_sum + rec.right_sum)) {
        ++local.failures;
      }
      const double stat = iterated_ln_or_neg_inf(Magnitude::exact(rec.right_sum), depth);
      for (std::size_t t = 0; t < k; ++t) {
        if (!(stat > req.thresholds[t])) break;
        ++local.counts[t];
      }
    }
    out[shard.index] = std::move(local);
  });

  WalkArm arm;
  arm.estimate.thresholds = req.thresholds;
  arm.estimate.counts.assign(k, 0);
  for (const auto& o : out) {
    for (std::size_t t = 0; t < k; ++t) arm.estimate.counts[t] += o.counts[t];
    arm.truncated += o.truncated;
    arm.identity_failures += o.failures;
  }
  arm.estimate.total = req.samples - arm.truncated;
  return arm;
}

}  // namespace

KsReport check_distributional_identity(const EnvironmentSpec& spec, int n,
                                       std::uint64_t samples,
                                       std::uint64_t steps_cap,
                                       const SeedPlan& plan, unsigned workers,
                                       bool collapse_left,
                                       const EnvironmentSpec* bpre_spec) {
  if (n < 1) fail(ErrorKind::kDomain, "identity check needs n >= 1");
  if (samples < 1) fail(ErrorKind::kDomain, "identity check needs samples >= 1");
  if (steps_cap < static_cast<std::uint64_t>(n)) {
    fail(ErrorKind::kDomain, "steps_cap must be at least n");
  }
  const std::uint64_t cap = (steps_cap - static_cast<std::uint64_t>(n)) / 2;
  const EnvironmentSpec& other = bpre_spec ? *bpre_spec : spec;

  WalkOptions options;
  options.steps_cap = steps_cap;
  options.right_sum_stop = cap;
  options.collapse_left_excursions = collapse_left;

  const std::uint64_t shards = shard_count(samples);
  std::vector<std::vector<double>> walk_vals(shards);
  std::vector<std::vector<double>> bpre_vals(shards);
  std::vector<std::uint64_t> truncated(shards, 0);
  for_each_shard(samples, workers, [&](const ShardRange& shard) {
    RngStream walk_rng = plan.stream(domain::kWalk, shard.index);
    RngStream bpre_rng = plan.stream(domain::kBpre, shard.index);
    auto& wv = walk_vals[shard.index];
    auto& bv = bpre_vals[shard.index];
    wv.reserve(shard.size());
    bv.reserve(shard.size());
    for (std::uint64_t i = shard.begin; i < shard.end; ++i) {
      SiteEnvironment env(spec, walk_rng);
      const WalkRecord rec = simulate_walk(env, n, options, walk_rng);
      if (rec.stop == WalkStop::kStepCap) {
        ++truncated[shard.index];
      } else {
        wv.push_back(static_cast<double>(std::min(rec.right_sum, cap)));
      }
      const Magnitude s = sample_partial_sum(other, n, bpre_rng);
      bv.push_back(std::min(s.to_double(), static_cast<double>(cap)));
    }
  });

  std::vector<double> walk;
  std::vector<double> bpre;
  std::uint64_t dropped = 0;
  for (std::uint64_t s = 0; s < shards; ++s) {
    walk.insert(walk.end(), walk_vals[s].begin(), walk_vals[s].end());
    bpre.insert(bpre.end(), bpre_vals[s].begin(), bpre_vals[s].end());
    dropped += truncated[s];
  }

  KsReport report;
  report.n = n;
  report.samples = samples;
  report.cap = cap;
  report.truncation_rate = static_cast<double>(dropped) / static_cast<double>(samples);
  report.walk_used = walk.size();
  report.bpre_used = bpre.size();
  if (report.truncation_rate > 0.5 || walk.empty()) {
    fail(ErrorKind::kInsufficientSamples,
         "more than half of the walks hit steps_cap before resolving");
  }
  const KsResult ks = ks_two_sample(walk, bpre);
  report.statistic = ks.statistic;
  report.p_value = ks.p_value;
  return report;
}

ExperimentResult run_theorem_experiment(const ExperimentRequest& req,
                                        const EnvironmentSpec& spec,
                                        const SeedPlan& plan) {
  ExperimentResult result;
  switch (req.kind) {
    case ExperimentKind::kZ1:
      require_sorted(req.thresholds);
      result.tails.push_back(run_z1(req, spec, plan));
      break;
    case ExperimentKind::kZl:
      require_sorted(req.thresholds);
      result.tails.push_back(run_zl(req, spec, plan));
      break;
    case ExperimentKind::kTn: {
      require_sorted(req.thresholds);
      const int n = req.index;
      if (n < 2) fail(ErrorKind::kDomain, "Tn experiments need n >= 2");
      const Coordinate coord{n - 1};
      std::vector<double> predicted;
      for (double m : req.thresholds) {
        predicted.push_back(m > 1.0 ? predicted_tail_tn(spec, n, m) : 0.0);
      }

      WalkArm walk = run_tn_walk_arm(req, spec, plan);
      walk.estimate.arm = "walk";
      walk.estimate.coordinate = coord;
      walk.estimate.predicted = predicted;
      walk.estimate.finalize();

      Sampler sampler = [&spec, n](RngStream& rng) {
        return iterated_ln_or_neg_inf(sample_partial_sum(spec, n, rng), n - 1);
      };
      TailEstimate bpre = mc_tail_estimate(sampler, req.thresholds, req.samples,
                                           plan, req.workers,
                                           Exceedance::kGreater, domain::kBpre);
      bpre.arm = "bpre";
      bpre.coordinate = coord;
      bpre.predicted = predicted;
      bpre.finalize();

      result.truncation_rate =
          static_cast<double>(walk.truncated) / static_cast<double>(req.samples);
      result.identity_failures = walk.identity_failures;
      result.tails.push_back(std::move(walk.estimate));
      result.tails.push_back(std::move(bpre));
      break;
    }
    case ExperimentKind::kIdentity: {
      result.ks = check_distributional_identity(spec, req.index, req.samples,
                                                req.steps_cap, plan, req.workers,
                                                req.collapse_left_excursions);
      result.truncation_rate = result.ks->truncation_rate;
      break;
    }
  }
  return result;
}

}  // namespace heavytail
