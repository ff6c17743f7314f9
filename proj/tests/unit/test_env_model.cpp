#include <gtest/gtest.h>

#include <cfloat>
#include <cmath>
#include <numbers>
#include <random>

#include "heavytail/env_model.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/stats.hpp"
#include "oracles.hpp"

using namespace heavytail;

namespace {

EnvironmentSpec log_power_spec() {
  EnvironmentSpec s;
  s.alpha = 2.5;
  s.eta = 3.0;
  s.ell = SlowlyVarying::log_power(1.0);
  s.g = SubThresholdLaw::uniform(-3.0, -1.0);
  return s;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kConfig;
}

}  // namespace

TEST(ValidateSpec, ReferenceSpecHasNegativeDrift) {
  const ValidationReport r = validate_spec(reference_spec());
  EXPECT_NEAR(r.mean_v, -0.5, 1e-12);
  EXPECT_NEAR(r.tail_mass, 0.25, 1e-15);
  EXPECT_TRUE(r.solomon_ok);
  EXPECT_TRUE(r.mean_rho_infinite);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(ValidateSpec, UnitTailMassViolatesDrift) {
  EnvironmentSpec s = reference_spec();
  s.eta = 1.0;
  const ValidationReport r = validate_spec(s);
  EXPECT_NEAR(r.tail_mass, 1.0, 1e-15);
  EXPECT_NEAR(r.mean_v, 2.0, 1e-12);
  EXPECT_FALSE(r.solomon_ok);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings.front().rfind("SolomonViolated", 0), 0u) << r.warnings.front();
}

TEST(ValidateSpec, RejectsTailMassAboveOne) {
  EnvironmentSpec s = reference_spec();
  s.eta = 0.5;
  EXPECT_EQ(kind_of([&] { validate_spec(s); }), ErrorKind::kSpecInvalid);
}

TEST(ValidateSpec, RejectsOutOfRangeParameters) {
  EnvironmentSpec s = reference_spec();
  s.alpha = 1.0;
  EXPECT_EQ(kind_of([&] { validate_spec(s); }), ErrorKind::kSpecInvalid);
  s = reference_spec();
  s.g = SubThresholdLaw::point_mass(3.0);
  EXPECT_EQ(kind_of([&] { validate_spec(s); }), ErrorKind::kSpecInvalid);
  s = reference_spec();
  s.g = SubThresholdLaw::uniform(-1.0, -2.0);
  EXPECT_EQ(kind_of([&] { validate_spec(s); }), ErrorKind::kSpecInvalid);
}

TEST(ValidateSpec, MeanMatchesIndependentIntegralForLogPowerTail) {
  const EnvironmentSpec s = log_power_spec();
  const ValidationReport r = validate_spec(s);
  // E[V; V > eta] = eta T(eta) + int_eta^inf T(x) dx, with x = eta / t.
  auto tail = [&](oracle::Real x) {
    return std::pow(x, -2.5L) * std::log(std::numbers::e_v<oracle::Real> + x);
  };
  const oracle::Real eta = 3;
  const oracle::Real integral = oracle::integrate(
      [&](oracle::Real t) { return t <= 0 ? 0 : tail(eta / t) * eta / (t * t); }, 0, 1,
      1e-15L);
  const oracle::Real mass = tail(eta);
  const oracle::Real expected = eta * mass + integral + (1 - mass) * (-2.0L);
  EXPECT_NEAR(r.mean_v, static_cast<double>(expected), 1e-9 * std::fabs(expected));
  EXPECT_NEAR(r.tail_mass, static_cast<double>(mass), 1e-15);
}

TEST(InvCdf, ReferenceQuantiles) {
  const EnvironmentSpec s = reference_spec();
  EXPECT_NEAR(inv_cdf_v(s, 0.99), 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(inv_cdf_v(s, 0.75), 2.0);
  EXPECT_DOUBLE_EQ(inv_cdf_v(s, 0.5), -2.0);
  EXPECT_EQ(kind_of([&] { inv_cdf_v(s, 0.0); }), ErrorKind::kDomain);
  EXPECT_EQ(kind_of([&] { inv_cdf_v(s, 1.0); }), ErrorKind::kDomain);
}

TEST(InvCdf, RoundTripsTheTail) {
  for (const EnvironmentSpec& s : {reference_spec(), log_power_spec()}) {
    for (double x = s.eta * 1.001; x < 1e5; x *= 1.7) {
      const double p = s.tail(x);
      const double q = inv_cdf_v(s, 1.0 - p);
      EXPECT_NEAR(s.tail(q), p, 1e-10) << "x=" << x;
    }
  }
}

TEST(InvCdf, ExceedanceFormIsExactDeepInTheTail) {
  const EnvironmentSpec s = log_power_spec();
  for (double x : {1e3, 1e6, 1e12, 1e50}) {
    const double p = s.tail(x);
    EXPECT_NEAR(quantile_from_exceedance(s, p) / x, 1.0, 1e-9);
  }
}

TEST(InvCdf, IsNondecreasing) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(1e-9, 1.0 - 1e-9);
  for (const EnvironmentSpec& s : {reference_spec(), log_power_spec()}) {
    for (int i = 0; i < 20000; ++i) {
      double a = u(gen);
      double b = u(gen);
      if (a > b) std::swap(a, b);
      ASSERT_LE(inv_cdf_v(s, a), inv_cdf_v(s, b));
    }
  }
}

TEST(AFromV, Examples) {
  EXPECT_DOUBLE_EQ(a_from_v(0.0), 0.5);
  EXPECT_NEAR(a_from_v(std::log(3.0)), 0.25, 1e-16);
  const long double expected = 1.0L / (1.0L + std::exp(10.0L));
  EXPECT_NEAR(a_from_v(10.0), static_cast<double>(expected), 1e-20);
  EXPECT_NEAR(a_from_v(10.0), 4.539787e-5, 1e-11);
}

TEST(AFromV, MatchesExtendedPrecisionAcrossRange) {
  for (double v = -30.0; v <= 700.0; v += 0.37) {
    const long double expected = 1.0L / (1.0L + std::exp(static_cast<long double>(v)));
    ASSERT_NEAR(a_from_v(v) / static_cast<double>(expected), 1.0, 4e-16) << v;
  }
}

TEST(AFromV, SymmetricAndStrictlyDecreasing) {
  double prev = 1.0;
  for (double v = -30.0; v <= 30.0; v += 0.01) {
    EXPECT_NEAR(a_from_v(v) + a_from_v(-v), 1.0, 1e-15);
    const double a = a_from_v(v);
    EXPECT_LT(a, prev);
    prev = a;
  }
}

TEST(AFromV, UnderflowPolicy) {
  EXPECT_EQ(kind_of([] { a_from_v(800.0); }), ErrorKind::kUnderflow);
  EXPECT_EQ(a_from_v(800.0, UnderflowPolicy::kClamp), DBL_MIN);
  EXPECT_EQ(kind_of([] { a_from_v(-40.0); }), ErrorKind::kUnderflow);
  EXPECT_EQ(a_from_v(-40.0, UnderflowPolicy::kClamp), std::nextafter(1.0, 0.0));
  EXPECT_GT(a_from_v(700.0), 0.0);
}

TEST(AFromV, InvertsThroughVFromA) {
  for (double v = -20.0; v <= 700.0; v += 1.3) {
    // For v < 0, 1 - a carries an absolute rounding error of order 1e-16.
    const double tol = 1e-12 * std::max(1.0, std::fabs(v)) + 4e-16 * (1 + std::exp(-v));
    EXPECT_NEAR(v_from_a(a_from_v(v)), v, tol);
  }
}

TEST(SampleA, ForcedUniformsGiveComposedValues) {
  const EnvironmentSpec s = reference_spec();
  EXPECT_NEAR(a_from_v(inv_cdf_v(s, 0.5)), 0.880797, 1e-6);
  EXPECT_NEAR(a_from_v(inv_cdf_v(s, 0.99)), 4.539787e-5, 1e-11);
}

TEST(SampleA, TailFractionIsBinomial) {
  for (const EnvironmentSpec& s : {reference_spec(), log_power_spec()}) {
    RngStream rng(42, domain::kEnvironment, 0);
    const int n = 1'000'000;
    int above = 0;
    for (int i = 0; i < n; ++i) {
      if (sample_v(s, rng) > s.eta) ++above;
    }
    const double p = s.tail_mass();
    const double sd = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(above, n * p, 3 * sd);
  }
}

TEST(SampleA, BinnedLawMatchesSpec) {
  const EnvironmentSpec s = log_power_spec();
  const std::vector<double> edges{s.eta, 4.0, 6.0, 10.0, 30.0, 100.0, 1e3};
  std::vector<double> probs;
  probs.push_back(1.0 - s.tail_mass());
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    probs.push_back(s.tail(edges[i]) - s.tail(edges[i + 1]));
  }
  probs.push_back(s.tail(edges.back()));
  std::vector<std::uint64_t> counts(probs.size(), 0);
  RngStream rng(9, domain::kEnvironment, 0);
  for (int i = 0; i < 1'000'000; ++i) {
    const double v = sample_v(s, rng);
    std::size_t bin = 0;
    while (bin < edges.size() && v > edges[bin]) ++bin;
    ++counts[bin];
  }
  EXPECT_GT(chi_square_gof(counts, probs).p_value, 1e-3);
}

TEST(SlowlyVarying, DerivativeMatchesFiniteDifferences) {
  for (double beta : {-1.5, 0.5, 1.0, 3.0}) {
    const SlowlyVarying ell = SlowlyVarying::log_power(beta);
    for (double x = 1.0; x <= 1e6; x *= 1.9) {
      const long double h = 1e-4L * x;
      auto f = [&](long double t) {
        return std::pow(std::log(std::numbers::e_v<long double> + t),
                        static_cast<long double>(beta));
      };
      const long double fd = (f(x + h) - f(x - h)) / (2 * h);
      EXPECT_NEAR(ell.derivative(x) / static_cast<double>(fd), 1.0, 1e-6) << x;
    }
  }
  EXPECT_EQ(SlowlyVarying::one().derivative(5.0), 0.0);
}

TEST(SlowlyVarying, RatioConvergesToOne) {
  const SlowlyVarying ell = SlowlyVarying::log_power(2.0);
  for (double t : {2.0, 10.0, 100.0}) {
    double prev = INFINITY;
    for (int k = 1; k <= 12; ++k) {
      const double x = std::pow(10.0, k);
      const double gap = std::fabs(ell.value(t * x) / ell.value(x) - 1.0);
      EXPECT_LT(gap, prev) << "t=" << t << " k=" << k;
      prev = gap;
    }
  }
}

TEST(SlowlyVarying, PotterLimit) {
  // log L(log m) / log log m along m = exp(10^k), i.e. log L(y) / log y.
  const SlowlyVarying ell = SlowlyVarying::log_power(1.5);
  double prev = INFINITY;
  for (int k = 1; k <= 300; k += 10) {
    const double y = std::pow(10.0, k);
    const double r = std::log(ell.value(y)) / std::log(y);
    EXPECT_LT(r, prev);
    EXPECT_GT(r, 0.0);
    prev = r;
  }
  EXPECT_LT(prev, 0.02);
}

TEST(SubThresholdLaw, WeightCompletesTheTail) {
  const EnvironmentSpec s = log_power_spec();
  EXPECT_NEAR(s.g_weight() + s.tail_mass(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.g.mean(), -2.0);
  EXPECT_DOUBLE_EQ(s.g.quantile(0.25), -2.5);
}

TEST(TailDensity, IntegratesToTailMass) {
  const EnvironmentSpec s = log_power_spec();
  // x = eta / t maps (eta, inf) to (0, 1).
  const oracle::Real mass = oracle::integrate(
      [&](oracle::Real t) {
        if (t <= 0) return oracle::Real(0);
        const double x = static_cast<double>(3.0L / t);
        return static_cast<oracle::Real>(s.tail_density(x)) * 3.0L / (t * t);
      },
      0, 1, 1e-14L);
  EXPECT_NEAR(static_cast<double>(mass), s.tail_mass(), 1e-10);
}
