#include "heavytail/env_model.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "heavytail/errors.hpp"

namespace heavytail {

namespace {

constexpr double kE = std::numbers::e;

std::string describe(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// log P(V > x) on the tail branch; avoids underflow for large x.
double log_tail(const EnvironmentSpec& spec, double x) {
  double out = -spec.alpha * std::log(x);
  if (!spec.ell.is_constant()) {
    out += spec.ell.beta() * std::log(std::log(kE + x));
  }
  return out;
}

double tail_integral(const EnvironmentSpec& spec) {
  // E[V; V > eta] = eta T(eta) + int_eta^inf T(x) dx.
  const double a = spec.alpha;
  const double eta = spec.eta;
  if (spec.ell.is_constant()) {
    return a / (a - 1.0) * std::pow(eta, 1.0 - a);
  }
  // x = eta e^t turns the power-law decay into an exponential one.
  auto integrand = [&](double t) {
    const double log_x = std::log(eta) + t;
    double log_value = (1.0 - a) * log_x;
    if (!spec.ell.is_constant()) {
      const double log_e_plus_x = log_x > 40.0 ? log_x : std::log(kE + std::exp(log_x));
      log_value += spec.ell.beta() * std::log(log_e_plus_x);
    }
    return std::exp(log_value);
  };
  double error = 0.0;
  boost::math::quadrature::exp_sinh<double> integrator;
  const double body = integrator.integrate(integrand, 1e-13, &error);
  if (!(error <= 1e-10 * std::fabs(body))) {
    fail(ErrorKind::kConvergence,
         "tail mean integral did not reach relative tolerance 1e-10");
  }
  return eta * spec.tail(eta) + body;
}

}  // namespace

double SlowlyVarying::value(double x) const {
  if (kind_ == Kind::kConstantOne) return 1.0;
  return std::pow(std::log(kE + x), beta_);
}

double SlowlyVarying::derivative(double x) const {
  if (kind_ == Kind::kConstantOne) return 0.0;
  const double lg = std::log(kE + x);
  return beta_ * std::pow(lg, beta_ - 1.0) / (kE + x);
}

double EnvironmentSpec::tail(double x) const {
  return std::pow(x, -alpha) * ell.value(x);
}

double EnvironmentSpec::tail_density(double x) const {
  return alpha * std::pow(x, -alpha - 1.0) * ell.value(x) -
         std::pow(x, -alpha) * ell.derivative(x);
}

EnvironmentSpec reference_spec() { return EnvironmentSpec{}; }

ValidationReport validate_spec(const EnvironmentSpec& spec) {
  if (!(spec.alpha > 1.0) || !std::isfinite(spec.alpha)) {
    fail(ErrorKind::kSpecInvalid, "alpha must be a finite real > 1");
  }
  if (!(spec.eta > 0.0) || !std::isfinite(spec.eta)) {
    fail(ErrorKind::kSpecInvalid, "eta must be a finite real > 0");
  }
  if (!std::isfinite(spec.ell.beta())) {
    fail(ErrorKind::kSpecInvalid, "L exponent beta must be finite");
  }
  const auto& g = spec.g;
  if (!std::isfinite(g.lo()) || !std::isfinite(g.hi())) {
    fail(ErrorKind::kSpecInvalid, "G parameters must be finite");
  }
  if (g.kind() == SubThresholdLaw::Kind::kPointMass && !(g.location() < spec.eta)) {
    fail(ErrorKind::kSpecInvalid, "G point mass must sit below eta");
  }
  if (g.kind() == SubThresholdLaw::Kind::kUniformInterval &&
      !(g.lo() < g.hi() && g.hi() <= spec.eta)) {
    fail(ErrorKind::kSpecInvalid, "G interval must satisfy lo < hi <= eta");
  }

  ValidationReport report;
  report.tail_mass = spec.tail_mass();
  if (!(report.tail_mass <= 1.0)) {
    fail(ErrorKind::kSpecInvalid,
         "tail mass eta^-alpha L(eta) = " + describe(report.tail_mass) +
             " exceeds 1");
  }

  // x^-alpha L(x) must decrease on (eta, inf): alpha L(x) > x L'(x).
  for (int k = 0; k <= 8 * 16; ++k) {
    const double x = spec.eta * std::pow(10.0, k / 8.0);
    if (!(spec.alpha * spec.ell.value(x) > x * spec.ell.derivative(x))) {
      fail(ErrorKind::kSpecInvalid,
           "tail x^-alpha L(x) is not decreasing near x = " + describe(x));
    }
  }

  report.mean_v = spec.g_weight() * g.mean() + tail_integral(spec);
  report.solomon_ok = report.mean_v < 0.0;
  report.mean_rho_infinite = report.tail_mass > 0.0;
  if (!report.solomon_ok) {
    report.warnings.push_back("SolomonViolated: E[V] = " +
                              describe(report.mean_v) + " >= 0");
  }
  return report;
}

double quantile_from_exceedance(const EnvironmentSpec& spec, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorKind::kDomain, "exceedance probability must lie in (0, 1)");
  }
  const double mass = spec.tail_mass();
  if (p > mass) {
    const double w = spec.g_weight();
    const double q = w > 0.0 ? std::clamp((1.0 - p) / w, 0.0, 1.0) : 0.0;
    return spec.g.quantile(q);
  }
  if (spec.ell.is_constant()) {
    return std::max(spec.eta, std::pow(p, -1.0 / spec.alpha));
  }

  // Bracketed bisection on the monotone tail. The tolerance is 1e-12
  // absolute, relaxed to relative once x exceeds 1.
  const double target = std::log(p);
  double lo = spec.eta;
  double hi = 2.0 * spec.eta;
  while (log_tail(spec, hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      fail(ErrorKind::kConvergence, "tail quantile bracket diverged");
    }
  }
  while (hi - lo > 1e-12 * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (log_tail(spec, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double inv_cdf_v(const EnvironmentSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    fail(ErrorKind::kDomain, "inv_cdf_v needs u in (0, 1), got " + describe(u));
  }
  return quantile_from_exceedance(spec, 1.0 - u);
}

double a_from_v(double v, UnderflowPolicy policy) {
  if (!std::isfinite(v)) {
    fail(ErrorKind::kDomain, "a_from_v needs a finite v");
  }
  double a = 0.0;
  if (v > 0.0) {
    const double e = std::exp(-v);
    a = e / (1.0 + e);
  } else {
    a = 1.0 / (1.0 + std::exp(v));
  }
  if (a < std::numeric_limits<double>::min()) {
    if (policy == UnderflowPolicy::kClamp) return std::numeric_limits<double>::min();
    fail(ErrorKind::kUnderflow,
         "A = 1/(1+e^v) underflows for v = " + describe(v));
  }
  if (a >= 1.0) {
    if (policy == UnderflowPolicy::kClamp) return std::nextafter(1.0, 0.0);
    fail(ErrorKind::kUnderflow,
         "1 - A underflows (A rounds to 1) for v = " + describe(v));
  }
  return a;
}

double v_from_a(double a) {
  if (!(a > 0.0 && a < 1.0)) {
    fail(ErrorKind::kDomain, "v_from_a needs a in (0, 1)");
  }
  return std::log1p(-a) - std::log(a);
}

double sample_v(const EnvironmentSpec& spec, RngStream& rng) {
  return quantile_from_exceedance(spec, rng.uniform());
}

double sample_a(const EnvironmentSpec& spec, RngStream& rng,
                UnderflowPolicy policy) {
  return a_from_v(sample_v(spec, rng), policy);
}

}  // namespace heavytail
