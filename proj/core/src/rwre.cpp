#include "heavytail/rwre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "heavytail/errors.hpp"

namespace heavytail {

SiteEnvironment::SiteEnvironment(const EnvironmentSpec& spec, RngStream& rng)
    : spec_(&spec), rng_(&rng) {}

SiteEnvironment::SiteEnvironment(std::function<double(std::int64_t)> a_of_site)
    : injected_(std::move(a_of_site)) {}

double SiteEnvironment::draw(std::int64_t site) {
  if (injected_) return injected_(site);
  // Sites so far out that A underflows act as reflecting walls; the clamp
  // keeps a positive (if negligible) right-step probability.
  return sample_a(*spec_, *rng_, UnderflowPolicy::kClamp);
}

double SiteEnvironment::a(std::int64_t site) {
  auto& store = site >= 0 ? nonneg_ : neg_;
  const auto idx = static_cast<std::size_t>(site >= 0 ? site : -site - 1);
  while (store.size() <= idx) {
    const auto s = static_cast<std::int64_t>(store.size());
    store.push_back(draw(site >= 0 ? s : -s - 1));
  }
  return store[idx];
}

std::uint64_t WalkRecord::u_at(std::int64_t site) const {
  if (site < window_lo || site > n) return 0;
  return u_counts[static_cast<std::size_t>(site - window_lo)];
}

WalkRecord simulate_walk(SiteEnvironment& env, std::int64_t n,
                         const WalkOptions& options, RngStream& rng) {
  if (n < 1) fail(ErrorKind::kDomain, "simulate_walk needs n >= 1");
  if (options.steps_cap < static_cast<std::uint64_t>(n)) {
    fail(ErrorKind::kDomain, "steps_cap must be at least n");
  }

  WalkRecord rec;
  rec.n = n;
  rec.steps_cap = options.steps_cap;
  rec.window_lo = -static_cast<std::int64_t>(options.left_window);
  rec.u_counts.assign(static_cast<std::size_t>(n - rec.window_lo + 1), 0);

  // Right-step probabilities of sites 0..n-1 are used on every step; cache
  // them once.
  std::vector<double> a_right(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) a_right[static_cast<std::size_t>(i)] = env.a(i);

  const std::uint64_t stop_sum =
      options.right_sum_stop.value_or(std::numeric_limits<std::uint64_t>::max());
  std::int64_t x = 0;
  std::uint64_t steps = 0;
  rec.stop = WalkStop::kHitTarget;
  while (x < n) {
    if (steps >= options.steps_cap) {
      rec.stop = WalkStop::kStepCap;
      break;
    }
    if (rec.right_sum >= stop_sum) {
      rec.stop = WalkStop::kRightSumCap;
      break;
    }
    if (x == 0 && options.collapse_left_excursions) {
      ++steps;
      ++x;
      continue;
    }
    const double a =
        x >= 0 ? a_right[static_cast<std::size_t>(x)] : env.a(x);
    ++steps;
    if (rng.uniform() < a) {
      ++x;
      continue;
    }
    if (x >= 1) {
      ++rec.right_sum;
    } else {
      ++rec.left_sum;
    }
    if (x >= rec.window_lo) ++rec.u_counts[static_cast<std::size_t>(x - rec.window_lo)];
    --x;
  }
  rec.truncated = rec.stop != WalkStop::kHitTarget;
  rec.left_collapsed = options.collapse_left_excursions;
  rec.t_n = Magnitude::exact(steps);
  return rec;
}

WalkRecord simulate_walk(const EnvironmentSpec& spec, std::int64_t n,
                         std::uint64_t steps_cap, std::uint64_t left_window,
                         RngStream& rng) {
  SiteEnvironment env(spec, rng);
  WalkOptions options;
  options.steps_cap = steps_cap;
  options.left_window = left_window;
  return simulate_walk(env, n, options, rng);
}

}  // namespace heavytail
