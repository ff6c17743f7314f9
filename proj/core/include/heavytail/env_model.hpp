#pragma once

#include <string>
#include <vector>

#include "heavytail/rng.hpp"

namespace heavytail {

/// L in P(V > x) = x^{-alpha} L(x): either 1 or (log(e + x))^beta.
class SlowlyVarying {
 public:
  enum class Kind { kConstantOne, kLogPower };

  static SlowlyVarying one() { return SlowlyVarying(Kind::kConstantOne, 0.0); }
  static SlowlyVarying log_power(double beta) {
    return SlowlyVarying(Kind::kLogPower, beta);
  }

  Kind kind() const noexcept { return kind_; }
  double beta() const noexcept { return beta_; }
  bool is_constant() const noexcept { return kind_ == Kind::kConstantOne; }

  double value(double x) const;
  double derivative(double x) const;

 private:
  SlowlyVarying(Kind kind, double beta) : kind_(kind), beta_(beta) {}
  Kind kind_;
  double beta_;
};

/// Law G of V below the tail threshold. Its total mass is fixed by the
/// environment (1 - eta^{-alpha} L(eta)); only the shape is stored here.
class SubThresholdLaw {
 public:
  enum class Kind { kPointMass, kUniformInterval };

  static SubThresholdLaw point_mass(double location) {
    return SubThresholdLaw(Kind::kPointMass, location, location);
  }
  static SubThresholdLaw uniform(double lo, double hi) {
    return SubThresholdLaw(Kind::kUniformInterval, lo, hi);
  }

  Kind kind() const noexcept { return kind_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double location() const noexcept { return lo_; }

  /// Mean of the normalized law.
  double mean() const noexcept { return 0.5 * (lo_ + hi_); }
  /// Quantile of the normalized law at q in [0, 1].
  double quantile(double q) const noexcept { return lo_ + q * (hi_ - lo_); }

 private:
  SubThresholdLaw(Kind kind, double lo, double hi)
      : kind_(kind), lo_(lo), hi_(hi) {}
  Kind kind_;
  double lo_;
  double hi_;
};

/// Law of V = log((1 - A) / A): a regularly varying right tail above eta and
/// the sub-threshold law G below it.
struct EnvironmentSpec {
  double alpha = 2.0;
  double eta = 2.0;
  SlowlyVarying ell = SlowlyVarying::one();
  SubThresholdLaw g = SubThresholdLaw::point_mass(-2.0);

  /// P(V > x) = x^{-alpha} L(x) for x >= eta.
  double tail(double x) const;
  /// Density of V on (eta, inf): alpha x^{-alpha-1} L(x) - x^{-alpha} L'(x).
  double tail_density(double x) const;
  double tail_mass() const { return tail(eta); }
  double g_weight() const { return 1.0 - tail_mass(); }
};

/// alpha = 2, eta = 2, L = 1, G = point mass at -2 (weight 3/4).
EnvironmentSpec reference_spec();

struct ValidationReport {
  double mean_v = 0.0;
  double tail_mass = 0.0;
  bool solomon_ok = false;
  /// E[(1 - A) / A] diverges whenever the regularly varying tail carries
  /// mass; reported rather than computed.
  bool mean_rho_infinite = true;
  std::vector<std::string> warnings;
};

/// Checks parameter ranges, tail mass and monotonicity of the tail, then
/// computes E[V]. Throws SpecInvalid for unusable specs; a violated drift
/// condition is reported through solomon_ok and a warning.
ValidationReport validate_spec(const EnvironmentSpec& spec);

/// Quantile of V given the exceedance probability p = P(V > x), p in (0, 1).
double quantile_from_exceedance(const EnvironmentSpec& spec, double p);

/// Quantile of V at u in (0, 1). Throws DomainError outside that interval.
double inv_cdf_v(const EnvironmentSpec& spec, double u);

enum class UnderflowPolicy { kError, kClamp };

/// A = 1 / (1 + e^v) without overflow. When A is not a positive normal
/// double, throws UnderflowError (kError) or returns the smallest positive
/// normal (kClamp).
double a_from_v(double v, UnderflowPolicy policy = UnderflowPolicy::kError);

/// log((1 - a) / a), the inverse of a_from_v.
double v_from_a(double a);

double sample_v(const EnvironmentSpec& spec, RngStream& rng);
double sample_a(const EnvironmentSpec& spec, RngStream& rng,
                UnderflowPolicy policy = UnderflowPolicy::kError);

}  // namespace heavytail
