#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "heavytail/env_model.hpp"
#include "heavytail/extnum.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

/// Offspring law P(B = k) = a (1 - a)^k parametrized by v = log((1-a)/a),
/// which stays finite when a itself underflows.
class OffspringLaw {
 public:
  static OffspringLaw from_a(double a);
  static OffspringLaw from_v(double v);

  double v() const noexcept { return v_; }
  /// log(1 - a), evaluated without cancellation.
  double log_fail() const noexcept { return log_fail_; }
  /// log(a).
  double log_success() const noexcept { return log_success_; }
  /// log(-log(1 - a)); finite even when log(1 - a) underflows to zero.
  double log_neg_log_fail() const noexcept { return log_neg_log_fail_; }

 private:
  double v_ = 0.0;
  double log_fail_ = 0.0;
  double log_success_ = 0.0;
  double log_neg_log_fail_ = 0.0;
};

/// Inversion sampler floor(ln u / ln(1 - a)). Throws DomainError unless
/// a and u lie in (0, 1).
Magnitude sample_geometric(double a, double u);
Magnitude sample_geometric(const OffspringLaw& law, double u);

/// P(B_1 + ... + B_k >= m) for i.i.d. geometric B_i, exactly (up to
/// rounding), through the binomial identity
///   P(NB(k, a) >= m) = P(Bin(m + k - 1, a) <= k - 1)
/// summed term by term in the log domain. Throws ResourceError when k
/// exceeds kNbTermCap.
inline constexpr std::uint64_t kNbTermCap = 1'000'000;
double nb_tail_exact(std::uint64_t k, double a, std::uint64_t m);
double nb_log_tail_exact(std::uint64_t k, const OffspringLaw& law,
                         std::uint64_t m);

/// Particle counts up to this size are sampled exactly.
inline constexpr std::uint64_t kExactModeCutoff = 100'000;
/// Above this many particles exact mode switches from per-particle
/// inversion to the gamma-Poisson mixture.
inline constexpr std::uint64_t kInversionCutoff = 1'000;
/// Gaussian correction clamp, in standard deviations.
inline constexpr double kGaussianClamp = 6.0;

struct StepResult {
  Magnitude z;
  bool approximate = false;
};

/// Z_next = sum_{i=1}^{z_prev+1} B_i. Exact below kExactModeCutoff
/// particles, log-domain LLN + clamped Gaussian correction above.
StepResult step_generation(const Magnitude& z_prev, const OffspringLaw& law,
                           RngStream& rng);
StepResult step_generation(const Magnitude& z_prev, double a, RngStream& rng);

struct GenerationTrajectory {
  /// A_0 .. A_{n-1}; entries that underflow are clamped to the smallest
  /// positive normal, the exact value lives in env_v.
  std::vector<double> env;
  /// log((1 - A_l) / A_l) for the same generations.
  std::vector<double> env_v;
  /// Z_0 .. Z_n with Z_0 = 0.
  std::vector<Magnitude> sizes;
  std::optional<std::size_t> approx_from;
};

/// Draws A_0..A_{n-1} from the spec and iterates step_generation, using
/// A_{l-1} for generation l.
GenerationTrajectory simulate_bpre(const EnvironmentSpec& spec, int n,
                                   RngStream& rng);

/// Same recursion on a caller-supplied environment (entries are v values).
GenerationTrajectory simulate_bpre_in(std::span<const double> env_v,
                                      RngStream& rng);

/// ln Z_l from one fresh trajectory; -inf when Z_l = 0.
double sample_log_zl(const EnvironmentSpec& spec, int l, RngStream& rng);

/// Z_0 + ... + Z_{n-1} from one fresh trajectory.
Magnitude sample_partial_sum(const EnvironmentSpec& spec, int n,
                             RngStream& rng);

}  // namespace heavytail
