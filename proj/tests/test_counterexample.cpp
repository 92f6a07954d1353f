#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "warpspec/counterexample.hpp"

using namespace warpspec;

namespace {

RadialOperator critical_mode0(double k, double X) {
  const auto prof = make_critical_profile(0.75, k);
  const EndGeometry end(2, 1.0, prof, {0.0});
  return RadialOperator::from_end(end, 0, X);
}

CounterexampleOptions quick(double k) {
  CounterexampleOptions o;
  o.k = k;
  o.lambda_lo = 0.8;
  o.lambda_hi = 1.2;
  o.max_modes = 1;
  o.decay_window = {65536.0, 4194304.0};
  o.decay_per_octave = 8192;
  o.curvature_window = {100.0, 2000.0};
  return o;
}

}  // namespace

TEST(HessianDecay, PowerLawDecaysLikeOneOverR) {
  const auto rep = check_hessian_decay(WarpingProfile::power_law(1.0), {16.0, 65536.0}, 1024);
  EXPECT_TRUE(rep.tends_to_zero);
  EXPECT_NEAR(rep.envelope.decay_exponent, 1.0, 1e-6);
  EXPECT_NEAR(rep.max_abs, 1.0 / 16.0, 1e-15);
}

TEST(HessianDecay, ExponentialWarpingDoesNotDecay) {
  const auto rep = check_hessian_decay(WarpingProfile::exp_power(1.0, 1.0), {16.0, 4096.0}, 1024);
  EXPECT_FALSE(rep.tends_to_zero);
}

TEST(HessianDecay, CriticalProfileExponentIsAlpha) {
  for (double alpha : {0.6, 0.75, 0.9}) {
    const auto rep = check_hessian_decay(make_critical_profile(alpha, 6.0), {65536.0, 4194304.0}, 8192);
    EXPECT_TRUE(rep.tends_to_zero);
    EXPECT_NEAR(rep.envelope.decay_exponent, alpha, 0.1) << alpha;
  }
}

TEST(CurvatureOrder, SupIsTwiceTheOscillationAmplitude) {
  for (double k : {2.0, 6.0, -4.0}) {
    const auto rep = curvature_order(make_critical_profile(0.75, k), {100.0, 3000.0});
    EXPECT_NEAR(rep.sup_r_abs_K, 2 * std::abs(k), 0.2 * 2 * std::abs(k)) << k;
  }
}

TEST(CriticalScan, DecayExponentScalesWithOscillationAmplitude) {
  for (double k : {4.0, 6.0, 8.0}) {
    // Weak resonances separate slowly from the growing solution, so the
    // backward shot starts far out.
    const auto t = subdominant_trajectory(critical_mode0(k, 4000.0), 1.0, 8.0);
    const double rate = estimate_decay(t, DecayModel::power).rate;
    EXPECT_NEAR(rate, oracle::resonance_exponent(k), 0.15 * k / 4.0) << k;
  }
}

TEST(CriticalScan, CandidateOnlyNearResonance) {
  const auto op = critical_mode0(6.0, 400.0);
  EXPECT_EQ(classify(op, 1.0).classification, Classification::l2_candidate);
  for (double lambda : {0.5, 0.8, 1.3, 2.0}) {
    EXPECT_NE(classify(op, lambda).classification, Classification::l2_candidate) << lambda;
  }
}

TEST(CriticalScan, WeakOscillationGivesNoCandidate) {
  const auto rep = run_critical_counterexample(quick(1.5));
  for (const auto& r : rep.scan) EXPECT_NE(r.classification, Classification::l2_candidate) << r.lambda;
  EXPECT_FALSE(rep.candidate_ok);
}

TEST(CriticalScan, RefinedLocationIsStable) {
  RefineOptions base;
  const auto a = refine_candidate(critical_mode0(6.0, 1000.0), 0.7, 1.3, base);
  const auto b = refine_candidate(critical_mode0(6.0, 2000.0), 0.7, 1.3, base);
  RefineOptions fine = base;
  fine.tolerance *= 0.5;
  const auto c = refine_candidate(critical_mode0(6.0, 1000.0), 0.7, 1.3, fine);
  EXPECT_NEAR(a.lambda_star, 1.0, 0.05);
  EXPECT_NEAR(a.lambda_star, b.lambda_star, 0.01);
  EXPECT_NEAR(a.lambda_star, c.lambda_star, 0.01);
}

TEST(Counterexample, QuickRunPasses) {
  const auto rep = run_critical_counterexample(quick(6.0));
  EXPECT_TRUE(rep.decay_ok) << rep.verdict();
  EXPECT_TRUE(rep.curvature_ok) << rep.verdict();
  EXPECT_TRUE(rep.candidate_ok) << rep.verdict();
  EXPECT_TRUE(rep.threshold_ok) << rep.verdict();
  ASSERT_EQ(rep.clusters.size(), 1u);
  ASSERT_TRUE(rep.clusters[0].refined.has_value());
  EXPECT_NEAR(rep.clusters[0].refined->lambda_star, 1.0, 0.05);
  EXPECT_NE(rep.verdict().find("PASS"), std::string::npos);
}

TEST(Counterexample, FittedThresholdIsVacuousOrAboveTarget) {
  const auto rep = run_critical_counterexample(quick(6.0));
  EXPECT_GT(rep.lambda1, 1.0);
  EXPECT_NEAR(rep.fitted.constants.b1, 12.0, 1.2);
}

TEST(Counterexample, RejectsNonPositiveGrid) {
  auto o = quick(6.0);
  o.lambda_lo = 0.0;
  EXPECT_THROW(run_critical_counterexample(o), ParameterError);
}
