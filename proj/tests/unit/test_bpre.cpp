#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "heavytail/bpre.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/stats.hpp"
#include "oracles.hpp"

using namespace heavytail;

namespace {

std::uint64_t geo(double a, double u) { return sample_geometric(a, u).exact_value(); }

}  // namespace

TEST(SampleGeometric, InversionExamples) {
  EXPECT_EQ(geo(0.5, 0.3), 1u);
  EXPECT_EQ(geo(0.5, 0.9), 0u);
  EXPECT_EQ(geo(1e-6, std::exp(-1.0)), 999999u);
}

TEST(SampleGeometric, SmallSuccessProbabilityMatchesExtendedPrecision) {
  for (double a : {1e-3, 1e-6, 1e-9, 1e-12}) {
    for (double u : {0.9, 0.5, 0.1, 1e-3, 1e-9}) {
      const long double expected =
          std::floor(std::log(static_cast<long double>(u)) /
                     std::log1p(-static_cast<long double>(a)));
      const double got = static_cast<double>(geo(a, u));
      EXPECT_NEAR(got, static_cast<double>(expected), 1.0 + 1e-12 * got)
          << "a=" << a << " u=" << u;
    }
  }
}

TEST(SampleGeometric, BoundaryOfEachAtom) {
  // u in (q^{k+1}, q^k] maps to k.
  const double a = 0.3;
  const double q = 1 - a;
  for (int k = 0; k < 30; ++k) {
    const double upper = std::pow(q, k);
    const double lower = std::pow(q, k + 1);
    EXPECT_EQ(geo(a, upper * (1 - 1e-9)), static_cast<std::uint64_t>(k));
    EXPECT_EQ(geo(a, lower * (1 + 1e-9)), static_cast<std::uint64_t>(k));
  }
}

TEST(SampleGeometric, HugeValuesPromote) {
  const OffspringLaw law = OffspringLaw::from_v(200.0);
  const Magnitude m = sample_geometric(law, 0.5);
  EXPECT_FALSE(m.is_exact());
  EXPECT_NEAR(mag_ln(m), 200.0 + std::log(std::log(2.0)), 1e-9);
}

TEST(SampleGeometric, RejectsOutsideUnitInterval) {
  EXPECT_THROW(sample_geometric(0.0, 0.5), Error);
  EXPECT_THROW(sample_geometric(1.0, 0.5), Error);
  EXPECT_THROW(sample_geometric(0.5, 0.0), Error);
  EXPECT_THROW(sample_geometric(0.5, 1.0), Error);
}

TEST(NbTail, Examples) {
  EXPECT_NEAR(nb_tail_exact(1, 0.5, 3), 0.125, 1e-15);
  EXPECT_NEAR(nb_tail_exact(2, 0.5, 1), 0.75, 1e-15);
  EXPECT_NEAR(nb_tail_exact(2, 0.5, 2), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(nb_tail_exact(5, 0.3, 0), 1.0);
}

TEST(NbTail, MatchesConvolution) {
  for (int k : {1, 2, 3, 7, 20}) {
    for (double a : {0.9, 0.5, 0.1, 0.01}) {
      for (int m : {1, 2, 5, 17, 60, 150}) {
        const double expected = static_cast<double>(oracle::nb_tail_by_convolution(k, a, m));
        ASSERT_NEAR(nb_tail_exact(k, a, m), expected, 1e-12 * std::max(expected, 1e-300) + 1e-15)
            << "k=" << k << " a=" << a << " m=" << m;
      }
    }
  }
}

TEST(NbTail, DeepTailStaysRelativelyAccurate) {
  // k = 1 has the closed form (1 - a)^m, far below the smallest double here.
  EXPECT_NEAR(nb_log_tail_exact(1, OffspringLaw::from_a(0.5), 2000), 2000 * std::log(0.5), 1e-9);
  const double log_tail = nb_log_tail_exact(3, OffspringLaw::from_a(0.5), 5000);
  // pmf(j) = C(j+2, 2) 2^{-(j+3)}, summed in the log domain.
  long double log_sum = -INFINITY;
  for (int j = 5000; j < 5400; ++j) {
    const long double lt = std::log(0.5L * (j + 2.0L) * (j + 1.0L)) - (j + 3) * std::log(2.0L);
    const long double hi = std::max(log_sum, lt);
    log_sum = hi + std::log(std::exp(log_sum - hi) + std::exp(lt - hi));
  }
  EXPECT_NEAR(log_tail, static_cast<double>(log_sum), 1e-9 * std::fabs(log_tail));
}

TEST(NbTail, TermCapRaisesResourceError) {
  try {
    nb_tail_exact(kNbTermCap + 1, 0.5, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kResource);
  }
}

TEST(StepGeneration, SingleImmigrantIsOneGeometric) {
  RngStream a(1, domain::kBpre, 0);
  RngStream b(1, domain::kBpre, 0);
  for (int i = 0; i < 1000; ++i) {
    const StepResult s = step_generation(Magnitude::exact(0), 0.3, a);
    EXPECT_FALSE(s.approximate);
    EXPECT_EQ(s.z.exact_value(), geo(0.3, b.uniform()));
  }
}

TEST(StepGeneration, GeometricLawPassesChiSquare) {
  for (double a : {0.9, 0.5, 0.1, 1e-6}) {
    RngStream rng(77, domain::kBpre, 0);
    const double q = 1 - a;
    // Bins of equal probability under P(B >= k) = q^k.
    const int bins = 20;
    std::vector<double> edges;  // B >= edges[i] closes bin i
    for (int i = 1; i < bins; ++i) {
      edges.push_back(std::ceil(std::log(1.0 - static_cast<double>(i) / bins) / std::log1p(-a)));
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<double> probs;
    double prev = 1.0;
    for (double e : edges) {
      const double tail = std::pow(q, e);
      probs.push_back(prev - tail);
      prev = tail;
    }
    probs.push_back(prev);
    std::vector<std::uint64_t> counts(probs.size(), 0);
    for (int i = 0; i < 1'000'000; ++i) {
      const double z = step_generation(Magnitude::exact(0), a, rng).z.to_double();
      const auto bin = std::upper_bound(edges.begin(), edges.end(), z) - edges.begin();
      ++counts[static_cast<std::size_t>(bin)];
    }
    EXPECT_GT(chi_square_gof(counts, probs).p_value, 1e-3) << "a=" << a;
  }
}

TEST(StepGeneration, LargeExactCountHasNegativeBinomialMean) {
  RngStream rng(3, domain::kBpre, 0);
  const int draws = 100'000;
  double sum = 0;
  double sumsq = 0;
  for (int i = 0; i < draws; ++i) {
    const double z = step_generation(Magnitude::exact(10'000), 0.5, rng).z.to_double();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / draws;
  const double k = 10'001;
  // Var NB(k, a) = k (1 - a) / a^2 = 2k at a = 1/2.
  EXPECT_NEAR(mean, k, 3 * std::sqrt(2 * k / draws));
  const double var = sumsq / draws - mean * mean;
  EXPECT_NEAR(var / (2 * k), 1.0, 0.03);
}

TEST(StepGeneration, GammaPoissonPathMatchesNbOracle) {
  // k = 2000 uses the gamma-Poisson mixture; compare tails with the exact NB.
  const std::uint64_t k = 2000;
  const double a = 0.7;
  RngStream rng(19, domain::kBpre, 0);
  const int draws = 200'000;
  const std::vector<std::uint64_t> ms{700, 820, 857, 900, 1000};
  std::vector<std::uint64_t> hits(ms.size(), 0);
  for (int i = 0; i < draws; ++i) {
    const double z = step_generation(Magnitude::exact(k - 1), a, rng).z.to_double();
    for (std::size_t j = 0; j < ms.size(); ++j) hits[j] += z >= static_cast<double>(ms[j]);
  }
  for (std::size_t j = 0; j < ms.size(); ++j) {
    const double p = nb_tail_exact(k, a, ms[j]);
    const Interval ci = wilson_interval(hits[j], draws);
    EXPECT_TRUE(ci.contains(p)) << "m=" << ms[j] << " p=" << p << " hat="
                                << static_cast<double>(hits[j]) / draws;
  }
}

TEST(StepGeneration, AsymptoticModeFluctuationScale) {
  RngStream rng(5, domain::kBpre, 0);
  const Magnitude big = Magnitude::log_scale(std::log(1e12));
  const double expected = std::log(1e12 + 1);
  double max_dev = 0;
  for (int i = 0; i < 2000; ++i) {
    const StepResult s = step_generation(big, 0.5, rng);
    EXPECT_TRUE(s.approximate);
    max_dev = std::max(max_dev, std::fabs(mag_ln(s.z) - expected));
  }
  const double sigma = 1 / std::sqrt(1e12 * 0.5);
  EXPECT_LT(max_dev, 6.01 * sigma);
  EXPECT_GT(max_dev, 1.0 * sigma);
}

TEST(StepGeneration, HandoverAtExactCutoffIsContinuous) {
  // Just below the cutoff is sampled exactly, just above asymptotically.
  const double a = 0.2;
  RngStream r1(8, domain::kBpre, 0);
  RngStream r2(8, domain::kBpre, 1);
  const int draws = 100'000;
  std::vector<double> exact(draws);
  std::vector<double> approx(draws);
  for (int i = 0; i < draws; ++i) {
    const StepResult e = step_generation(Magnitude::exact(kExactModeCutoff - 1), a, r1);
    const StepResult g = step_generation(Magnitude::exact(kExactModeCutoff), a, r2);
    ASSERT_FALSE(e.approximate);
    ASSERT_TRUE(g.approximate);
    // Remove the one-particle shift in the mean so both target the same law.
    exact[i] = mag_ln(e.z);
    approx[i] = mag_ln(g.z) - std::log1p(1.0 / kExactModeCutoff);
  }
  const KsResult ks = ks_two_sample(exact, approx);
  const double critical = 1.628 * std::sqrt(2.0 / draws);  // 1% level
  EXPECT_LT(ks.statistic, critical);
}

TEST(SimulateBpre, TrajectoryShape) {
  RngStream rng(1, domain::kBpre, 0);
  const GenerationTrajectory t = simulate_bpre(reference_spec(), 6, rng);
  ASSERT_EQ(t.sizes.size(), 7u);
  ASSERT_EQ(t.env.size(), 6u);
  ASSERT_EQ(t.env_v.size(), 6u);
  EXPECT_TRUE(t.sizes.front().is_zero());
  EXPECT_THROW(simulate_bpre(reference_spec(), 0, rng), Error);
}

TEST(SimulateBpre, FirstGenerationMatchesQuadratureFreeOracle) {
  RngStream rng(2, domain::kBpre, 0);
  const int runs = 1'000'000;
  int at_least_10 = 0;
  int zero = 0;
  for (int i = 0; i < runs; ++i) {
    const Magnitude z1 = simulate_bpre(reference_spec(), 1, rng).sizes[1];
    at_least_10 += z1 >= Magnitude::exact(10);
    zero += z1.is_zero();
  }
  const double p10 = static_cast<double>(oracle::reference_z1_tail(10));
  EXPECT_TRUE(wilson_interval(at_least_10, runs).contains(p10)) << p10;
  // P(Z_1 = 0) = E[A].
  const double mean_a = static_cast<double>(
      oracle::reference_expectation([](oracle::Real v) { return oracle::a_of_v(v); }));
  EXPECT_TRUE(wilson_interval(zero, runs).contains(mean_a)) << mean_a;
}

TEST(SimulateBpre, FirstGenerationConditionalOnEnvironment) {
  // Bin A_0 and compare P(Z_1 >= m | A_0 in bin) with the bin-averaged (1-a)^m.
  RngStream rng(4, domain::kBpre, 0);
  // Tail draws have A < 1/(1 + e^2), about 0.119.
  const std::vector<double> bin_edges{0.0, 0.01, 0.05, 0.119};
  const int m = 3;
  std::vector<std::uint64_t> n(3, 0);
  std::vector<std::uint64_t> hits(3, 0);
  std::vector<double> expected(3, 0.0);
  for (int i = 0; i < 1'000'000; ++i) {
    const GenerationTrajectory t = simulate_bpre(reference_spec(), 1, rng);
    const double a = t.env[0];
    for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
      if (a > bin_edges[b] && a <= bin_edges[b + 1]) {
        ++n[b];
        hits[b] += t.sizes[1] >= Magnitude::exact(m);
        expected[b] += std::pow(1 - a, m);
      }
    }
  }
  for (std::size_t b = 0; b < n.size(); ++b) {
    ASSERT_GT(n[b], 1000u);
    EXPECT_TRUE(wilson_interval(hits[b], n[b]).contains(expected[b] / n[b])) << b;
  }
}

TEST(SimulateBpre, SecondGenerationGivenEnvironmentMatchesNb) {
  // Fixed environment injected through simulate_bpre_in.
  const std::vector<double> env_v{std::log(0.6 / 0.4), std::log(0.7 / 0.3)};
  RngStream rng(6, domain::kBpre, 0);
  const int runs = 400'000;
  std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> by_k;  // k -> (n, hits)
  const std::uint64_t m = 4;
  for (int i = 0; i < runs; ++i) {
    const GenerationTrajectory t = simulate_bpre_in(env_v, rng);
    const std::uint64_t k = t.sizes[1].exact_value();
    if (k > 3) continue;
    auto& entry = by_k[k];
    ++entry.first;
    entry.second += t.sizes[2].exact_value() >= m;
  }
  for (const auto& [k, entry] : by_k) {
    const double p = static_cast<double>(oracle::nb_tail_by_convolution(
        static_cast<int>(k + 1), 0.3L, static_cast<int>(m)));
    EXPECT_TRUE(wilson_interval(entry.second, entry.first).contains(p)) << "k=" << k;
  }
}

TEST(SimulateBpre, MonotoneInEnvironmentUnderSharedUniforms) {
  for (int trial = 0; trial < 200; ++trial) {
    RngStream pick(trial, domain::kControl, 0);
    std::vector<double> low{pick.uniform() * 6 - 3, pick.uniform() * 6 - 3};
    std::vector<double> high = low;
    high[trial % 2] += 1.0 + pick.uniform();  // larger v means smaller A
    RngStream r1(trial, domain::kBpre, 0);
    RngStream r2(trial, domain::kBpre, 0);
    const GenerationTrajectory a = simulate_bpre_in(low, r1);
    const GenerationTrajectory b = simulate_bpre_in(high, r2);
    for (int l = 1; l <= 2; ++l) {
      if (a.sizes[l].is_exact() && b.sizes[l].is_exact() &&
          a.sizes[l].exact_value() <= kInversionCutoff) {
        EXPECT_LE(a.sizes[l], b.sizes[l]) << "trial " << trial << " l=" << l;
      }
    }
    if (trial % 2 == 0) {
      EXPECT_LE(a.sizes[1], b.sizes[1]);
    }
  }
}

TEST(SampleLogZl, ForcedFirstGeneration) {
  // A_0 = 0.5 and u = 0.3 give Z_1 = 1, so ln Z_1 = 0.
  const std::vector<double> env_v{0.0};
  EXPECT_EQ(mag_ln(sample_geometric(OffspringLaw::from_v(env_v[0]), 0.3)), 0.0);
}

TEST(SampleLogZl, FirstGenerationLogTailMatchesOracle) {
  RngStream rng(12, domain::kBpre, 0);
  const int draws = 2'000'000;
  int hits = 0;
  for (int i = 0; i < draws; ++i) hits += sample_log_zl(reference_spec(), 1, rng) >= 5.0;
  const double p = static_cast<double>(oracle::reference_z1_tail(std::exp(5.0L)));
  EXPECT_TRUE(wilson_interval(hits, draws).contains(p)) << p;
}

TEST(SampleLogZl, ZeroIsNegativeInfinity) {
  RngStream rng(13, domain::kBpre, 0);
  int zeros = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = sample_log_zl(reference_spec(), 1, rng);
    if (x == -INFINITY) ++zeros;
  }
  EXPECT_GT(zeros, 500);
}

TEST(SampleLogZl, AgreesWithFullTrajectoriesOnCappedValues) {
  // Z_2 capped at 10^4, where both samplers run exactly. Values are compared
  // as integers so that ties stay ties.
  RngStream r1(14, domain::kBpre, 0);
  RngStream r2(14, domain::kBpre, 1);
  const double cap = 1e4;
  const int draws = 100'000;
  std::vector<double> direct(draws);
  std::vector<double> traj(draws);
  for (int i = 0; i < draws; ++i) {
    const double lz = sample_log_zl(reference_spec(), 2, r1);
    direct[i] = lz > std::log(cap) ? cap : std::round(std::exp(lz));
    traj[i] = std::min(cap, simulate_bpre(reference_spec(), 2, r2).sizes[2].to_double());
  }
  EXPECT_GT(ks_two_sample(direct, traj).p_value, 0.001);
}

TEST(SamplePartialSum, EmptySumForOneGeneration) {
  RngStream rng(15, domain::kBpre, 0);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_partial_sum(reference_spec(), 1, rng).is_zero());
}

TEST(SamplePartialSum, AgreesWithTrajectorySumsInLaw) {
  RngStream r1(15, domain::kBpre, 1);
  RngStream r2(15, domain::kBpre, 2);
  const double cap = 1e4;
  const int draws = 100'000;
  std::vector<double> direct(draws);
  std::vector<double> traj(draws);
  for (int i = 0; i < draws; ++i) {
    direct[i] = std::min(cap, sample_partial_sum(reference_spec(), 3, r1).to_double());
    const GenerationTrajectory t = simulate_bpre(reference_spec(), 3, r2);
    traj[i] = std::min(cap, mag_add(mag_add(t.sizes[0], t.sizes[1]), t.sizes[2]).to_double());
  }
  EXPECT_GT(ks_two_sample(direct, traj).p_value, 0.001);
}
