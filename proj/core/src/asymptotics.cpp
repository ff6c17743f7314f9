#include "heavytail/asymptotics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "heavytail/bpre.hpp"
#include "heavytail/errors.hpp"

namespace heavytail {

namespace {

using boost::math::quadrature::gauss_kronrod;

// Beyond this distance from ln m the factor e^{-m e^{-v}} is 0 or 1 to
// double precision (e^{45} > 2^64, e^{-45} < 2^-64).
constexpr double kTransitionHalfWidth = 45.0;
constexpr unsigned kMaxDepth = 25;

// log(log1p(e^{-v})).
double log_log1p_exp_neg(double v) {
  if (v > 30.0) return -v + std::log1p(-0.5 * std::exp(-v));
  return std::log(std::log1p(std::exp(-v)));
}

// (1 + e^{-v})^{-m} = exp(-m log1p(e^{-v})) with m = e^{ln_m}.
double survival_factor(double v, double ln_m) {
  return std::exp(-std::exp(ln_m + log_log1p_exp_neg(v)));
}

template <class F>
double integrate_segment(F&& f, double a, double b, double rel_tol,
                         double& err_acc) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  const double value =
      gauss_kronrod<double, 31>::integrate(f, a, b, kMaxDepth, rel_tol * 0.1, &err);
  err_acc += err;
  return value;
}

void check_rel_tol(double rel_tol) {
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-4)) {
    fail(ErrorKind::kDomain, "rel_tol must lie in [1e-12, 1e-4]");
  }
}

void check_converged(double value, double err, double rel_tol,
                     const char* what) {
  if (!(err <= rel_tol * std::fabs(value)) && !(value == 0.0 && err == 0.0)) {
    fail(ErrorKind::kConvergence,
         std::string(what) + ": adaptive refinement exhausted its node budget "
                             "before meeting rel_tol");
  }
}

}  // namespace

double predicted_tail_z1(const EnvironmentSpec& spec, const Magnitude& m) {
  const double y = mag_ln(m);
  if (!(y > 1.0)) fail(ErrorKind::kDomain, "predicted_tail_z1 needs ln m > 1");
  if (!std::isfinite(y)) return 0.0;
  return std::pow(y, -spec.alpha) * spec.ell.value(y);
}

double predicted_tail_zl(const EnvironmentSpec& spec, int l, double y) {
  if (l < 2) fail(ErrorKind::kDomain, "predicted_tail_zl needs l >= 2");
  if (!(y > 1.0)) fail(ErrorKind::kDomain, "predicted_tail_zl needs y > 1");
  return std::pow(spec.alpha, -spec.alpha) * std::pow(y, -spec.alpha) *
         spec.ell.value(y);
}

double predicted_tail_tn(const EnvironmentSpec& spec, int n, double m) {
  if (n < 2) fail(ErrorKind::kDomain, "predicted_tail_tn needs n >= 2");
  if (!(m > 1.0)) fail(ErrorKind::kDomain, "predicted_tail_tn needs m > 1");
  return std::pow(spec.alpha, -spec.alpha) * std::pow(m, -spec.alpha) *
         spec.ell.value(m);
}

Z1TailParts z1_tail_parts(const EnvironmentSpec& spec, double ln_m,
                          double rel_tol) {
  check_rel_tol(rel_tol);
  Z1TailParts parts;
  if (ln_m == -std::numeric_limits<double>::infinity()) {
    parts.sub_threshold = spec.g_weight();
    parts.tail = spec.tail_mass();
    return parts;
  }
  if (std::isnan(ln_m) || ln_m == std::numeric_limits<double>::infinity()) {
    fail(ErrorKind::kDomain, "z1 tail needs finite ln m");
  }

  double err = 0.0;
  const double w = spec.g_weight();
  if (w > 0.0) {
    const auto& g = spec.g;
    if (g.kind() == SubThresholdLaw::Kind::kPointMass) {
      parts.sub_threshold = w * survival_factor(g.location(), ln_m);
    } else {
      auto f = [&](double v) { return survival_factor(v, ln_m); };
      const double lo = std::max(g.lo(), ln_m - kTransitionHalfWidth);
      const double body = integrate_segment(f, lo, g.hi(), rel_tol, err);
      parts.sub_threshold = w * body / (g.hi() - g.lo());
      err *= w / (g.hi() - g.lo());
    }
  }

  const double eta = spec.eta;
  const double lo = std::max(eta, ln_m - kTransitionHalfWidth);
  const double mid = std::max(eta, ln_m);
  const double hi = std::max(eta, ln_m + kTransitionHalfWidth);
  auto integrand = [&](double v) {
    return survival_factor(v, ln_m) * spec.tail_density(v);
  };
  parts.tail = integrate_segment(integrand, lo, mid, rel_tol, err) +
               integrate_segment(integrand, mid, hi, rel_tol, err) +
               spec.tail(hi);
  check_converged(parts.total(), err, rel_tol, "z1_tail_quadrature");
  return parts;
}

double z1_tail_quadrature(const EnvironmentSpec& spec, const Magnitude& m,
                          double rel_tol) {
  if (m.is_zero()) {
    check_rel_tol(rel_tol);
    return 1.0;
  }
  return z1_tail_parts(spec, mag_ln(m), rel_tol).total();
}

double z1_tail_part_uform(const EnvironmentSpec& spec, double ln_m,
                          double rel_tol) {
  check_rel_tol(rel_tol);
  if (!std::isfinite(ln_m)) fail(ErrorKind::kDomain, "u-form needs finite ln m");

  // u ranges over (0, log(1 + e^{-eta})]; integrate in s = -log u so the
  // Laplace kernel e^{-m u} switches off near s = ln m.
  const double u_eta = std::log1p(std::exp(-spec.eta));
  const double s_eta = -std::log(u_eta);
  auto y_of_u = [](double u) { return -std::log(std::expm1(u)); };
  auto integrand = [&](double s) {
    const double u = std::exp(-s);
    const double laplace = std::exp(-std::exp(ln_m - s));
    // d/du R(y(u)) = f(y) e^u / (e^u - 1); du = u ds.
    const double jacobian = u * std::exp(u) / std::expm1(u);
    return laplace * spec.tail_density(y_of_u(u)) * jacobian;
  };
  double err = 0.0;
  const double lo = std::max(s_eta, ln_m - kTransitionHalfWidth);
  const double mid = std::max(s_eta, ln_m);
  const double hi = std::max(s_eta, ln_m + kTransitionHalfWidth);
  // Mass of the measure on (0, e^{-hi}], where the kernel is 1.
  const double inner = spec.tail(y_of_u(std::exp(-hi)));
  const double value = integrate_segment(integrand, lo, mid, rel_tol, err) +
                       integrate_segment(integrand, mid, hi, rel_tol, err) +
                       inner;
  check_converged(value, err, rel_tol, "z1_tail_part_uform");
  return value;
}

std::uint64_t nagaev_min_x(std::uint64_t n, double q, double delta) {
  const double bound = (std::log(static_cast<double>(n)) -
                        std::log(delta / (1.0 - delta))) /
                       std::log(1.0 / q);
  return bound <= 0.0 ? 0 : static_cast<std::uint64_t>(std::ceil(bound));
}

BoundReport nagaev_bound_check(std::uint64_t n, double q, std::uint64_t x,
                               double delta) {
  if (!(q > 0.0 && q < 1.0)) fail(ErrorKind::kDomain, "q must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) {
    fail(ErrorKind::kDomain, "delta must lie in (0, 1)");
  }
  if (n < 1 || n > 10'000 || x > 1'000'000) {
    fail(ErrorKind::kResource,
         "nagaev_bound_check is limited to 1 <= n <= 1e4 and x <= 1e6");
  }

  BoundReport r;
  const double log_lhs =
      nb_log_tail_exact(n, OffspringLaw::from_a(1.0 - q), x);
  const double log_naive =
      std::log(static_cast<double>(n)) + static_cast<double>(x) * std::log(q);
  r.lhs = std::exp(log_lhs);
  r.naive = std::exp(log_naive);
  const double threshold = (std::log(static_cast<double>(n)) -
                            std::log(delta / (1.0 - delta))) /
                           std::log(1.0 / q);
  r.condition_met = static_cast<double>(x) >= threshold;
  r.corrected_factor = 1.0 - delta / (2.0 * (1.0 - delta));
  r.printed_factor = 1.0 / (1.0 - delta);

  // Compared in logs; 1e-12 absorbs rounding in the two summations.
  constexpr double kSlack = 1e-12;
  r.holds_corrected =
      r.corrected_factor <= 0.0 ||
      log_lhs >= log_naive + std::log(r.corrected_factor) - kSlack;
  r.holds_printed = log_lhs >= log_naive + std::log(r.printed_factor) - kSlack;
  return r;
}

Magnitude exp_iterated(double x, int l) {
  if (l < 1) fail(ErrorKind::kDomain, "exp_iterated needs l >= 1");
  return Magnitude::tower(l, x);
}

double log_iterated(const Magnitude& m, int l) { return mag_iterated_ln(m, l); }

}  // namespace heavytail
