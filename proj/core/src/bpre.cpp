#include "heavytail/bpre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heavytail/errors.hpp"

namespace heavytail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// log(softplus(-v)) = log(log1p(e^-v)), stable for large v.
double log_softplus_neg(double v) {
  if (v > 30.0) {
    const double x = std::exp(-v);
    return -v + std::log1p(-0.5 * x);
  }
  return std::log(softplus(-v));
}

// Poisson means above this are drawn from the normal approximation, whose
// distributional error (skewness 1/sqrt(mean) < 1e-6) is far below anything
// a Monte Carlo run can resolve.
const double kLogPoissonExactMax = 40.0 * std::log(2.0);

Magnitude sample_poisson_log_mean(double log_mean, RngStream& rng) {
  if (log_mean <= kLogPoissonExactMax) {
    return Magnitude::exact(rng.poisson(std::exp(log_mean)));
  }
  const double n = rng.normal();
  if (log_mean < Magnitude::kPromotionLn - 1.0) {
    const double mean = std::exp(log_mean);
    return Magnitude::exact(
        static_cast<std::uint64_t>(std::nearbyint(mean + std::sqrt(mean) * n)));
  }
  return Magnitude::log_scale(log_mean +
                              std::log1p(n * std::exp(-0.5 * log_mean)));
}

// NB(k, a) as Poisson(Gamma(k) * rho); exact in distribution for any k.
Magnitude sample_gamma_poisson(double k, const OffspringLaw& law,
                               RngStream& rng) {
  const double g = rng.gamma(k);
  return sample_poisson_log_mean(std::log(g) + law.v(), rng);
}

}  // namespace

OffspringLaw OffspringLaw::from_a(double a) {
  if (!(a > 0.0 && a < 1.0)) {
    fail(ErrorKind::kDomain, "success probability must lie in (0, 1)");
  }
  OffspringLaw law;
  law.log_fail_ = std::log1p(-a);
  law.log_success_ = std::log(a);
  law.v_ = law.log_fail_ - law.log_success_;
  law.log_neg_log_fail_ = std::log(-law.log_fail_);
  return law;
}

OffspringLaw OffspringLaw::from_v(double v) {
  if (!std::isfinite(v)) {
    fail(ErrorKind::kDomain, "offspring law needs a finite v");
  }
  OffspringLaw law;
  law.v_ = v;
  law.log_fail_ = -softplus(-v);
  law.log_success_ = -softplus(v);
  law.log_neg_log_fail_ = log_softplus_neg(v);
  return law;
}

Magnitude sample_geometric(const OffspringLaw& law, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    fail(ErrorKind::kDomain, "geometric inversion needs u in (0, 1)");
  }
  const double log_u = std::log(u);
  if (law.log_fail() < -std::numeric_limits<double>::min()) {
    const double ratio = log_u / law.log_fail();
    if (ratio < static_cast<double>(Magnitude::kPromotionThreshold)) {
      return Magnitude::exact(static_cast<std::uint64_t>(std::floor(ratio)));
    }
  }
  return Magnitude::log_scale(std::log(-log_u) - law.log_neg_log_fail());
}

Magnitude sample_geometric(double a, double u) {
  return sample_geometric(OffspringLaw::from_a(a), u);
}

double nb_log_tail_exact(std::uint64_t k, const OffspringLaw& law,
                         std::uint64_t m) {
  if (m == 0) return 0.0;
  if (k == 0) return kNegInf;
  if (k > kNbTermCap) {
    fail(ErrorKind::kResource, "negative binomial oracle limited to " +
                                   std::to_string(kNbTermCap) + " terms");
  }
  if (m > std::numeric_limits<std::uint64_t>::max() - k) {
    fail(ErrorKind::kResource, "negative binomial oracle: m + k overflows");
  }
  // Sum_{s=0}^{k-1} C(N, s) a^s (1-a)^{N-s}, N = m + k - 1.
  const double trials = static_cast<double>(m + k - 1);
  const double odds = law.log_success() - law.log_fail();
  std::vector<double> terms;
  terms.reserve(k);
  double term = trials * law.log_fail();
  for (std::uint64_t s = 0; s < k; ++s) {
    terms.push_back(term);
    const double sd = static_cast<double>(s);
    term += std::log((trials - sd) / (sd + 1.0)) + odds;
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return std::min(0.0, top + std::log(acc));
}

double nb_tail_exact(std::uint64_t k, double a, std::uint64_t m) {
  return std::exp(nb_log_tail_exact(k, OffspringLaw::from_a(a), m));
}

StepResult step_generation(const Magnitude& z_prev, const OffspringLaw& law,
                           RngStream& rng) {
  const Magnitude particles = mag_add(z_prev, Magnitude::exact(1));

  if (particles.is_exact()) {
    const std::uint64_t k = particles.exact_value();
    if (k <= kInversionCutoff) {
      Magnitude total;
      for (std::uint64_t i = 0; i < k; ++i) {
        total = mag_add(total, sample_geometric(law, rng.uniform()));
      }
      return {total, false};
    }
    const double kd = static_cast<double>(k);
    // Gaussian mode needs k(1-a) > 36 so that the 6-sigma clamp keeps the
    // correction above -1; otherwise the exact mixture is used at any size.
    const bool gaussian_ok = std::log(kd) + law.log_fail() > std::log(36.0);
    if (k <= kExactModeCutoff || !gaussian_ok) {
      return {sample_gamma_poisson(kd, law, rng), false};
    }
  }
  if (particles.kind() == Magnitude::Kind::kTower) {
    return {particles, true};
  }

  // Z ~ k rho (1 + sigma N), sigma = 1 / sqrt(k (1 - a)), in the log domain.
  const double log_k = mag_ln(particles);
  const double sigma = std::exp(-0.5 * (log_k + law.log_fail()));
  const double limit = kGaussianClamp * sigma;
  double correction = std::clamp(sigma * rng.normal(), -limit, limit);
  correction = std::max(correction, -1.0 + 1e-12);
  const double log_z = log_k + law.v() + std::log1p(correction);
  return {Magnitude::from_ln_rounded(log_z), true};
}

StepResult step_generation(const Magnitude& z_prev, double a, RngStream& rng) {
  return step_generation(z_prev, OffspringLaw::from_a(a), rng);
}

GenerationTrajectory simulate_bpre_in(std::span<const double> env_v,
                                      RngStream& rng) {
  GenerationTrajectory traj;
  traj.env_v.assign(env_v.begin(), env_v.end());
  traj.env.reserve(env_v.size());
  traj.sizes.reserve(env_v.size() + 1);
  traj.sizes.push_back(Magnitude::exact(0));
  for (std::size_t l = 1; l <= env_v.size(); ++l) {
    const double v = env_v[l - 1];
    traj.env.push_back(a_from_v(v, UnderflowPolicy::kClamp));
    const auto step =
        step_generation(traj.sizes.back(), OffspringLaw::from_v(v), rng);
    if (step.approximate && !traj.approx_from) traj.approx_from = l;
    traj.sizes.push_back(step.z);
  }
  return traj;
}

GenerationTrajectory simulate_bpre(const EnvironmentSpec& spec, int n,
                                   RngStream& rng) {
  if (n < 1) fail(ErrorKind::kDomain, "simulate_bpre needs n >= 1");
  std::vector<double> env_v(static_cast<std::size_t>(n));
  for (auto& v : env_v) v = sample_v(spec, rng);
  return simulate_bpre_in(env_v, rng);
}

double sample_log_zl(const EnvironmentSpec& spec, int l, RngStream& rng) {
  if (l < 1) fail(ErrorKind::kDomain, "sample_log_zl needs l >= 1");
  Magnitude z;
  for (int g = 0; g < l; ++g) {
    const double v = sample_v(spec, rng);
    z = step_generation(z, OffspringLaw::from_v(v), rng).z;
  }
  return mag_ln(z);
}

Magnitude sample_partial_sum(const EnvironmentSpec& spec, int n,
                             RngStream& rng) {
  if (n < 1) fail(ErrorKind::kDomain, "partial sum needs n >= 1");
  Magnitude z;
  Magnitude sum;
  for (int g = 1; g < n; ++g) {
    const double v = sample_v(spec, rng);
    z = step_generation(z, OffspringLaw::from_v(v), rng).z;
    sum = mag_add(sum, z);
  }
  return sum;
}

}  // namespace heavytail
