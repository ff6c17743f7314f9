#include "heavytail_cli/commands.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "heavytail/asymptotics.hpp"
#include "heavytail/bpre.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/experiments.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/rwre.hpp"

namespace heavytail::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kTailHeader{"coordinate", "threshold", "count",
                                           "total",      "p_hat",     "ci_lo",
                                           "ci_hi",      "predicted", "ratio"};

std::string u64(std::uint64_t x) { return std::to_string(x); }

SeedPlan plan_for(const RunConfig& c) { return SeedPlan{c.seed, 0}; }

// Positive predictions only; 0 marks "no prediction at this threshold".
std::string prediction_cell(double p) { return p > 0.0 ? format_double(p) : ""; }

Table tail_table(const TailEstimate& est, bool has_counts) {
  Table t{kTailHeader, {}};
  for (std::size_t i = 0; i < est.thresholds.size(); ++i) {
    const double pred = i < est.predicted.size() ? est.predicted[i] : 0.0;
    const double ratio =
        i < est.ratio.size() ? est.ratio[i] : std::numeric_limits<double>::quiet_NaN();
    t.add({est.coordinate.label(), format_double(est.thresholds[i]),
           has_counts ? u64(est.counts[i]) : "", has_counts ? u64(est.total) : "",
           format_double(est.p_hat[i]), format_double(est.ci_lo[i]),
           format_double(est.ci_hi[i]), prediction_cell(pred), format_double(ratio)});
  }
  return t;
}

void plot_tail(PlotData& plot, const TailEstimate& est) {
  for (std::size_t i = 0; i < est.thresholds.size(); ++i) {
    const std::string x = format_double(est.thresholds[i]);
    plot.add(est.arm, x, "p_hat", est.p_hat[i]);
    plot.add(est.arm, x, "ci_lo", est.ci_lo[i]);
    plot.add(est.arm, x, "ci_hi", est.ci_hi[i]);
    if (i < est.predicted.size() && est.predicted[i] > 0.0) {
      plot.add(est.arm, x, "predicted", est.predicted[i]);
      plot.add(est.arm, x, "ratio", est.ratio[i]);
    }
  }
}

json trend_json(const TailEstimate& est) {
  try {
    const TrendReport r = ratio_convergence_report(est);
    return {{"monotone_tail_flag", r.monotone_tail_flag}, {"last_gap", r.last_gap}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kInsufficientData) throw;
    return {{"unavailable", e.what()}};
  }
}

CommandOutput validate_env(const RunConfig& c) {
  const ValidationReport r = validate_spec(c.env);
  CommandOutput out;
  out.main = Table{{"key", "value"}, {}};
  out.main.add({"mean_v", format_double(r.mean_v)});
  out.main.add({"tail_mass", format_double(r.tail_mass)});
  out.main.add({"solomon_ok", r.solomon_ok ? "true" : "false"});
  out.main.add({"mean_rho_infinite", r.mean_rho_infinite ? "true" : "false"});
  std::string warnings;
  for (const auto& w : r.warnings) warnings += (warnings.empty() ? "" : ";") + w;
  out.main.add({"warnings", warnings});
  out.plot.add("env", "0", "mean_v", r.mean_v);
  out.plot.add("env", "0", "tail_mass", r.tail_mass);
  out.summary = {{"mean_v", r.mean_v},
                 {"tail_mass", r.tail_mass},
                 {"solomon_ok", r.solomon_ok},
                 {"mean_rho_infinite", r.mean_rho_infinite},
                 {"warnings", r.warnings}};
  out.report = {fmt::format("mean_v={:.17g}", r.mean_v),
                fmt::format("tail_mass={:.17g}", r.tail_mass),
                fmt::format("solomon_ok={}", r.solomon_ok),
                fmt::format("mean_rho_infinite={}", r.mean_rho_infinite)};
  for (const auto& w : r.warnings) out.report.push_back("warning=" + w);
  return out;
}

CommandOutput sample_env(const RunConfig& c) {
  const auto& b = c.sample_env;
  const SeedPlan plan = plan_for(c);
  std::vector<std::vector<std::pair<double, double>>> shards(shard_count(b.samples));
  for_each_shard(b.samples, c.workers, [&](const ShardRange& s) {
    RngStream rng = plan.stream(domain::kEnvironment, s.index);
    auto& local = shards[s.index];
    local.reserve(s.size());
    for (std::uint64_t i = s.begin; i < s.end; ++i) {
      const double v = sample_v(c.env, rng);
      local.emplace_back(v, a_from_v(v, b.underflow));
    }
  });
  CommandOutput out;
  out.main = Table{{"index", "v", "a"}, {}};
  std::uint64_t index = 0;
  for (const auto& shard : shards) {
    for (const auto& [v, a] : shard) {
      out.main.add({u64(index), format_double(v), format_double(a)});
      out.plot.add("v", u64(index), "v", v);
      ++index;
    }
  }
  out.summary = {{"samples", b.samples}};
  out.report = {fmt::format("samples={}", b.samples)};
  return out;
}

CommandOutput sim_bpre(const RunConfig& c) {
  const auto& b = c.sim_bpre;
  const SeedPlan plan = plan_for(c);
  std::vector<std::vector<GenerationTrajectory>> shards(shard_count(b.runs));
  for_each_shard(b.runs, c.workers, [&](const ShardRange& s) {
    RngStream rng = plan.stream(domain::kBpre, s.index);
    for (std::uint64_t i = s.begin; i < s.end; ++i) {
      shards[s.index].push_back(simulate_bpre(c.env, b.generations, rng));
    }
  });
  CommandOutput out;
  out.main = Table{{"run_id", "generation", "a_value", "z", "approx_flag"}, {}};
  std::uint64_t run = 0;
  std::uint64_t approximate_runs = 0;
  for (const auto& shard : shards) {
    for (const auto& traj : shard) {
      if (traj.approx_from) ++approximate_runs;
      for (std::size_t g = 0; g < traj.sizes.size(); ++g) {
        const bool approx = traj.approx_from && g >= *traj.approx_from;
        out.main.add({u64(run), u64(g), g == 0 ? "" : format_double(traj.env[g - 1]),
                      to_string(traj.sizes[g]), approx ? "1" : "0"});
        out.plot.add(u64(run), u64(g), "ln_z", mag_ln(traj.sizes[g]));
      }
      ++run;
    }
  }
  out.summary = {{"runs", b.runs},
                 {"generations", b.generations},
                 {"approximate_runs", approximate_runs}};
  out.report = {fmt::format("runs={}", b.runs),
                fmt::format("approximate_runs={}", approximate_runs)};
  return out;
}

CommandOutput sim_walk(const RunConfig& c) {
  const auto& b = c.sim_walk;
  const SeedPlan plan = plan_for(c);
  WalkOptions options;
  options.steps_cap = b.steps_cap;
  options.left_window = b.left_window;
  options.collapse_left_excursions = b.collapse_left_excursions;
  std::vector<std::vector<WalkRecord>> shards(shard_count(b.runs));
  for_each_shard(b.runs, c.workers, [&](const ShardRange& s) {
    RngStream rng = plan.stream(domain::kWalk, s.index);
    for (std::uint64_t i = s.begin; i < s.end; ++i) {
      SiteEnvironment env(c.env, rng);
      shards[s.index].push_back(simulate_walk(env, b.n, options, rng));
    }
  });
  CommandOutput out;
  out.main = Table{{"run_id", "n", "t_n", "sum_u_pos", "left_sum", "truncated"}, {}};
  std::uint64_t run = 0;
  std::uint64_t truncated = 0;
  std::uint64_t identity_failures = 0;
  for (const auto& shard : shards) {
    for (const auto& rec : shard) {
      if (rec.truncated) {
        ++truncated;
      } else if (rec.t_n.exact_value() !=
                 static_cast<std::uint64_t>(rec.n) + 2 * (rec.left_sum + rec.right_sum)) {
        ++identity_failures;
      }
      out.main.add({u64(run), std::to_string(rec.n), to_string(rec.t_n),
                    u64(rec.right_sum), u64(rec.left_sum), rec.truncated ? "1" : "0"});
      out.plot.add(u64(run), std::to_string(rec.n), "ln_t_n", mag_ln(rec.t_n));
      ++run;
    }
  }
  const double rate = static_cast<double>(truncated) / static_cast<double>(b.runs);
  out.summary = {{"runs", b.runs},
                 {"truncation_rate", rate},
                 {"identity_failures", identity_failures}};
  out.report = {fmt::format("runs={}", b.runs),
                fmt::format("truncation_rate={:.17g}", rate),
                fmt::format("identity_failures={}", identity_failures)};
  return out;
}

CommandOutput tail_z1(const RunConfig& c) {
  const auto& b = c.tail_z1;
  ExperimentRequest req;
  req.kind = ExperimentKind::kZ1;
  req.method = b.method;
  req.coordinate = Coordinate{b.coordinate_depth};
  req.thresholds = b.thresholds;
  req.samples = b.samples;
  req.rel_tol = b.rel_tol;
  req.workers = c.workers;
  const ExperimentResult r = run_theorem_experiment(req, c.env, plan_for(c));
  const TailEstimate& est = r.tails.front();
  CommandOutput out;
  out.main = tail_table(est, b.method == Z1Method::kMonteCarlo);
  plot_tail(out.plot, est);
  out.summary = {{"method", est.arm}};
  if (b.method != Z1Method::kPredict) out.summary["trend"] = trend_json(est);
  out.report = {"method=" + est.arm, fmt::format("thresholds={}", b.thresholds.size())};
  return out;
}

CommandOutput tail_zl(const RunConfig& c) {
  const auto& b = c.tail_zl;
  ExperimentRequest req;
  req.kind = ExperimentKind::kZl;
  req.index = b.l;
  req.thresholds = b.thresholds;
  req.samples = b.samples;
  req.workers = c.workers;
  const ExperimentResult r = run_theorem_experiment(req, c.env, plan_for(c));
  const TailEstimate& est = r.tails.front();
  CommandOutput out;
  out.main = tail_table(est, true);
  plot_tail(out.plot, est);
  out.summary = {{"l", b.l}, {"trend", trend_json(est)}};
  out.report = {fmt::format("l={}", b.l), fmt::format("samples={}", b.samples)};
  return out;
}

CommandOutput tail_tn(const RunConfig& c) {
  const auto& b = c.tail_tn;
  ExperimentRequest req;
  req.kind = ExperimentKind::kTn;
  req.index = b.n;
  req.thresholds = b.thresholds;
  req.samples = b.samples;
  req.steps_cap = b.steps_cap;
  req.collapse_left_excursions = b.collapse_left_excursions;
  req.workers = c.workers;
  const ExperimentResult r = run_theorem_experiment(req, c.env, plan_for(c));
  const TailEstimate& walk = r.tails.at(0);
  const TailEstimate& bpre = r.tails.at(1);
  CommandOutput out;
  out.main = tail_table(walk, true);
  out.extra.emplace_back(".bpre.csv", tail_table(bpre, true));
  plot_tail(out.plot, walk);
  plot_tail(out.plot, bpre);
  out.summary = {{"n", b.n},
                 {"walk_used", walk.total},
                 {"truncation_rate", r.truncation_rate},
                 {"identity_failures", r.identity_failures}};
  out.report = {fmt::format("n={}", b.n),
                fmt::format("truncation_rate={:.17g}", r.truncation_rate),
                fmt::format("identity_failures={}", r.identity_failures)};
  return out;
}

CommandOutput check_identity(const RunConfig& c) {
  const auto& b = c.check_identity;
  const KsReport ks = check_distributional_identity(c.env, b.n, b.samples, b.steps_cap,
                                                    plan_for(c), c.workers,
                                                    b.collapse_left_excursions);
  CommandOutput out;
  out.main = Table{{"n", "samples", "cap", "statistic", "p_value", "truncation_rate"}, {}};
  out.main.add({std::to_string(ks.n), u64(ks.samples), u64(ks.cap),
                format_double(ks.statistic), format_double(ks.p_value),
                format_double(ks.truncation_rate)});
  out.plot.add("ks", std::to_string(ks.n), "statistic", ks.statistic);
  out.plot.add("ks", std::to_string(ks.n), "p_value", ks.p_value);
  out.summary = {{"statistic", ks.statistic},
                 {"p_value", ks.p_value},
                 {"truncation_rate", ks.truncation_rate},
                 {"walk_used", ks.walk_used},
                 {"bpre_used", ks.bpre_used}};
  out.report = {fmt::format("statistic={:.17g}", ks.statistic),
                fmt::format("p_value={:.17g}", ks.p_value),
                fmt::format("truncation_rate={:.17g}", ks.truncation_rate)};
  return out;
}

CommandOutput check_nagaev(const RunConfig& c) {
  const auto& b = c.check_nagaev;
  CommandOutput out;
  out.main = Table{{"n", "q", "delta", "x", "condition_met", "lhs", "naive",
                    "corrected_factor", "printed_factor", "holds_corrected",
                    "holds_printed"},
                   {}};
  std::uint64_t checked = 0;
  std::uint64_t corrected_failures = 0;
  std::uint64_t printed_failures = 0;
  bool counterexample_seen = false;
  auto check = [&](std::uint64_t n, double q, double delta, bool counterexample) {
    const std::uint64_t x0 = nagaev_min_x(n, q, delta);
    for (std::uint64_t x = x0; x <= x0 + b.x_span; ++x) {
      const BoundReport r = nagaev_bound_check(n, q, x, delta);
      ++checked;
      if (r.condition_met && !r.holds_corrected) ++corrected_failures;
      if (r.condition_met && !r.holds_printed) {
        ++printed_failures;
        if (counterexample) counterexample_seen = true;
      }
      out.main.add({u64(n), format_double(q), format_double(delta), u64(x),
                    r.condition_met ? "1" : "0", format_double(r.lhs),
                    format_double(r.naive), format_double(r.corrected_factor),
                    format_double(r.printed_factor), r.holds_corrected ? "1" : "0",
                    r.holds_printed ? "1" : "0"});
      const std::string series = fmt::format("n={};q={};delta={}", n, q, delta);
      out.plot.add(series, u64(x), "lhs", r.lhs);
      out.plot.add(series, u64(x), "naive", r.naive);
    }
  };
  for (std::uint64_t n = b.n_min; n <= b.n_max; ++n) {
    for (double q : b.q) {
      for (double delta : b.delta) check(n, q, delta, false);
    }
  }
  if (b.include_printed_counterexample) {
    for (double q : b.q) check(1, q, 0.5, true);
  }
  out.summary = {{"checked", checked},
                 {"corrected_failures", corrected_failures},
                 {"printed_failures", printed_failures},
                 {"printed_factor_fails_at_n1_delta_half", counterexample_seen}};
  out.report = {fmt::format("checked={}", checked),
                fmt::format("corrected_failures={}", corrected_failures),
                fmt::format("printed_failures={}", printed_failures)};
  if (counterexample_seen) {
    out.report.push_back(
        "note=printed factor 1/(1-delta) fails at n=1 delta=0.5; corrected factor "
        "1-delta/(2(1-delta)) holds");
  }
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{
      "validate-env", "sample-env", "sim-bpre",       "sim-walk",    "tail-z1",
      "tail-zl",      "tail-tn",    "check-identity", "check-nagaev"};
  return names;
}

CommandOutput run_command(const std::string& name, const RunConfig& config) {
  if (name == "validate-env") return validate_env(config);
  if (name == "sample-env") return sample_env(config);
  if (name == "sim-bpre") return sim_bpre(config);
  if (name == "sim-walk") return sim_walk(config);
  if (name == "tail-z1") return tail_z1(config);
  if (name == "tail-zl") return tail_zl(config);
  if (name == "tail-tn") return tail_tn(config);
  if (name == "check-identity") return check_identity(config);
  if (name == "check-nagaev") return check_nagaev(config);
  fail(ErrorKind::kConfig, "unknown command " + name);
}

}  // namespace heavytail::cli
