#include <gtest/gtest.h>

#include <cmath>

#include "heavytail/asymptotics.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/experiments.hpp"
#include "oracles.hpp"

using namespace heavytail;

namespace {

const EnvironmentSpec kRef = reference_spec();
const SeedPlan kPlan{1, 0};

}  // namespace

TEST(Experiments, PredictModeForTn) {
  ExperimentRequest req;
  req.kind = ExperimentKind::kTn;
  req.index = 2;
  req.thresholds = {3.0, 4.0, 5.0};
  req.samples = 20'000;
  req.steps_cap = 10'000'000;
  const ExperimentResult r = run_theorem_experiment(req, kRef, kPlan);
  ASSERT_EQ(r.tails.size(), 2u);
  EXPECT_EQ(r.tails[0].arm, "walk");
  EXPECT_EQ(r.tails[1].arm, "bpre");
  EXPECT_NEAR(r.tails[0].predicted[2], 0.01, 1e-15);
  EXPECT_EQ(r.identity_failures, 0u);
  EXPECT_EQ(r.truncation_rate, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    const Interval a{r.tails[0].ci_lo[i], r.tails[0].ci_hi[i]};
    const Interval b{r.tails[1].ci_lo[i], r.tails[1].ci_hi[i]};
    EXPECT_TRUE(a.overlaps(b)) << "threshold " << req.thresholds[i];
  }
}

TEST(Experiments, TnArmsFollowTheFirstGenerationLaw) {
  // For n = 2 the statistic is ln Z_1, so both arms estimate P(Z_1 > e^m).
  ExperimentRequest req;
  req.kind = ExperimentKind::kTn;
  req.index = 2;
  req.thresholds = {2.0, 4.0};
  req.samples = 200'000;
  req.steps_cap = 10'000'000;
  const ExperimentResult r = run_theorem_experiment(req, kRef, kPlan);
  for (std::size_t i = 0; i < 2; ++i) {
    const long double m = std::floor(std::exp(static_cast<long double>(req.thresholds[i]))) + 1;
    const double p = static_cast<double>(oracle::reference_z1_tail(m));
    EXPECT_TRUE(r.tails[0].ci_lo[i] <= p && p <= r.tails[0].ci_hi[i]) << p;
    EXPECT_TRUE(r.tails[1].ci_lo[i] <= p && p <= r.tails[1].ci_hi[i]) << p;
  }
}

TEST(Experiments, TnThresholdBeyondStepCapIsRejected) {
  ExperimentRequest req;
  req.kind = ExperimentKind::kTn;
  req.index = 2;
  req.thresholds = {20.0};
  req.samples = 10;
  req.steps_cap = 1000;
  EXPECT_THROW(run_theorem_experiment(req, kRef, kPlan), Error);
}

TEST(Experiments, IdentityAtOneIsDegenerate) {
  ExperimentRequest req;
  req.kind = ExperimentKind::kIdentity;
  req.index = 1;
  req.samples = 5000;
  const ExperimentResult r = run_theorem_experiment(req, kRef, kPlan);
  ASSERT_TRUE(r.ks.has_value());
  EXPECT_EQ(r.ks->statistic, 0.0);
}

TEST(Experiments, IdentityAtTwoAgrees) {
  const KsReport r = check_distributional_identity(kRef, 2, 50'000, 2'000'002, kPlan, 4);
  EXPECT_EQ(r.cap, 1'000'000u);
  EXPECT_EQ(r.truncation_rate, 0.0);
  EXPECT_GT(r.p_value, 0.001);
}

TEST(Experiments, IdentityNegativeControlIsRejected) {
  EnvironmentSpec lighter = kRef;
  lighter.alpha = 3.0;
  const KsReport r =
      check_distributional_identity(kRef, 2, 100'000, 2'000'002, kPlan, 4, true, &lighter);
  EXPECT_LT(r.p_value, 1e-6);
}

TEST(Experiments, Z1QuadratureTrend) {
  ExperimentRequest req;
  req.kind = ExperimentKind::kZ1;
  req.method = Z1Method::kQuadrature;
  req.coordinate = Coordinate{1};
  req.thresholds = {5, 10, 20, 50, 100, 200};
  const ExperimentResult r = run_theorem_experiment(req, kRef, kPlan);
  const TrendReport trend = ratio_convergence_report(r.tails[0]);
  EXPECT_TRUE(trend.monotone_tail_flag);
  EXPECT_LT(trend.last_gap, 0.05);
}

TEST(Experiments, Z1PredictLeavesEstimatesEmpty) {
  ExperimentRequest req;
  req.kind = ExperimentKind::kZ1;
  req.method = Z1Method::kPredict;
  req.coordinate = Coordinate{1};
  req.thresholds = {0.5, 10};
  const ExperimentResult r = run_theorem_experiment(req, kRef, kPlan);
  EXPECT_EQ(r.tails[0].predicted[0], 0.0);
  EXPECT_NEAR(r.tails[0].predicted[1], 0.01, 1e-15);
  EXPECT_TRUE(std::isnan(r.tails[0].p_hat[1]));
}

TEST(Experiments, Z1MonteCarloCoversQuadrature) {
  ExperimentRequest req;
  req.kind = ExperimentKind::kZ1;
  req.thresholds = {1, 10, 100};
  req.samples = 1'000'000;
  req.workers = 4;
  const ExperimentResult mc = run_theorem_experiment(req, kRef, kPlan);
  for (std::size_t i = 0; i < req.thresholds.size(); ++i) {
    const double q = z1_tail_quadrature(
        kRef, Magnitude::exact(static_cast<std::uint64_t>(req.thresholds[i])));
    EXPECT_TRUE(mc.tails[0].ci_lo[i] <= q && q <= mc.tails[0].ci_hi[i]) << q;
  }
}

TEST(Experiments, ZlNeedsSecondGeneration) {
  ExperimentRequest req;
  req.kind = ExperimentKind::kZl;
  req.index = 1;
  req.thresholds = {2.0};
  EXPECT_THROW(run_theorem_experiment(req, kRef, kPlan), Error);
}

TEST(Experiments, UnsortedThresholdsAreRejected) {
  ExperimentRequest req;
  req.kind = ExperimentKind::kZl;
  req.index = 2;
  req.thresholds = {4.0, 2.0};
  EXPECT_THROW(run_theorem_experiment(req, kRef, kPlan), Error);
}
