#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "warpspec/solver.hpp"

using namespace warpspec;

namespace {

RadialOperator free_op(double x0, double X) {
  return RadialOperator::from_potential([](double) { return 0.0; }, x0, X, "free");
}

RadialOperator wvn_op(double X, double c = -8.0) {
  return RadialOperator::from_potential([c](double x) { return c * std::sin(2 * x) / x; }, 1.0, X, "wvn");
}

}  // namespace

TEST(Integrate, FreeSineSolution) {
  const auto t = integrate(free_op(0.0, 10 * oracle::pi), 1.0);
  for (std::size_t j = 0; j < t.size(); ++j) {
    EXPECT_NEAR(t.w(j), std::sin(t.x[j]), 1e-8);
    EXPECT_NEAR(t.w_prime(j), std::cos(t.x[j]), 1e-8);
    EXPECT_GT(t.amplitude(j), 0.0);
  }
  EXPECT_NEAR(t.phase.back(), 10 * oracle::pi, 1e-8);
  EXPECT_LE(reinsertion_residual(t, free_op(0.0, 10 * oracle::pi)), 1e-6);
}

TEST(Integrate, BesselSolutionOfThePlane) {
  const EndGeometry plane(2, 1.0, WarpingProfile::power_law(1.0), {0.0});
  const auto op = RadialOperator::from_end(plane, 0, 60.0);
  const auto t = integrate(op, 1.0);
  for (std::size_t j = 0; j < t.size(); j += 7) {
    EXPECT_NEAR(t.w(j), oracle::bessel_regular(t.x[j], 1.0), 1e-7) << t.x[j];
  }
  EXPECT_LE(reinsertion_residual(t, op), 1e-6);
}

TEST(Integrate, AgreesWithFixedStepRungeKutta) {
  const auto op = wvn_op(60.0);
  for (double lambda : {0.5, 1.0, 3.0}) {
    const auto t = integrate(op, lambda, Boundary::robin(0.3));
    const auto ref = oracle::rk4([](double x) { return -8 * std::sin(2 * x) / x; }, lambda, 1.0, 60.0, {1.0, 0.3}, 1e-3);
    const std::size_t last = t.size() - 1;
    const double scale = std::hypot(ref[0], ref[1]);
    EXPECT_NEAR(t.w(last), ref[0], 1e-7 * scale);
    EXPECT_NEAR(t.w_prime(last), ref[1], 1e-7 * scale);
  }
}

TEST(Integrate, BoundaryConditionsAtStart) {
  const auto op = free_op(0.0, 5.0);
  const auto n = integrate(op, 2.0, Boundary::neumann());
  EXPECT_NEAR(n.w(0), 1.0, 1e-15);
  EXPECT_NEAR(n.w_prime(0), 0.0, 1e-15);
  const auto r = integrate(op, 2.0, Boundary::robin(-0.7));
  EXPECT_NEAR(r.w_prime(0) / r.w(0), -0.7, 1e-14);
}

TEST(Integrate, ReinsertionResidualOnReferenceCases) {
  for (const auto& op : {wvn_op(400.0), free_op(0.0, 50.0)}) {
    for (double lambda : {0.3, 1.0, 2.5}) {
      EXPECT_LE(reinsertion_residual(integrate(op, lambda), op), 1e-6) << op.label() << " " << lambda;
      EXPECT_LE(reinsertion_residual(subdominant_trajectory(op, lambda), op), 1e-6) << op.label() << " " << lambda;
    }
  }
}

TEST(Integrate, EvanescentRegionStaysStable) {
  // lambda far below a barrier: the amplitude grows exponentially without overflow.
  const auto op = RadialOperator::from_potential([](double) { return 25.0; }, 0.0, 100.0);
  const auto t = integrate(op, 1.0);
  const double expected = std::sqrt(24.0) * 100.0 - std::log(2.0 * std::sqrt(24.0));
  EXPECT_NEAR(std::log(std::abs(t.w(t.size() - 1))), expected, 1e-8 * expected);
}

TEST(Eigenvalues, FreeInterval) {
  const auto ev = dirichlet_interval_eigenvalues(free_op(0.0, oracle::pi), 4);
  for (int k = 1; k <= 4; ++k) EXPECT_NEAR(ev[k - 1], oracle::free_dirichlet(k, oracle::pi), 1e-6);
}

TEST(Eigenvalues, ConstantShift) {
  const auto base = dirichlet_interval_eigenvalues(wvn_op(30.0), 5);
  const auto moved = dirichlet_interval_eigenvalues(wvn_op(30.0).shifted(2.5), 5);
  for (std::size_t k = 0; k < base.size(); ++k) EXPECT_NEAR(moved[k], base[k] + 2.5, 1e-8);
}

TEST(Eigenvalues, AttractivePotentialInterlacesBelowFree) {
  const auto op = RadialOperator::from_potential([](double x) { return -0.25 / (x * x); }, 1.0, 20.0);
  const auto ev = dirichlet_interval_eigenvalues(op, 6);
  for (int k = 1; k <= 6; ++k) {
    EXPECT_LT(ev[k - 1], oracle::free_dirichlet(k, 19.0));
    if (k > 1) {
      EXPECT_GT(ev[k - 1], oracle::free_dirichlet(k - 1, 19.0));
    }
  }
}

TEST(SturmPhase, StrictlyIncreasingInLambda) {
  for (const auto& op : {wvn_op(200.0), free_op(0.0, 30.0)}) {
    double prev = -INFINITY;
    for (double lambda = -1.0; lambda <= 4.0; lambda += 0.05) {
      const double phase = terminal_phase(op, lambda);
      EXPECT_GT(phase, prev) << op.label() << " " << lambda;
      prev = phase;
    }
  }
}

TEST(Classify, FreeOperatorIsOscillatory) {
  const auto r = classify(free_op(0.0, 400.0), 1.0);
  EXPECT_EQ(r.classification, Classification::oscillatory);
  EXPECT_NEAR(r.envelope_exponent, 0.0, 0.02);
  EXPECT_GE(r.tail_mass_ratio, 0.15);
}

TEST(Classify, EuclideanSpaceHasNoEmbeddedEigenvalues) {
  const EndGeometry end(3, 1.0, WarpingProfile::power_law(1.0), sphere_eigenvalues(3, 3));
  const auto op = RadialOperator::from_end(end, 0, 1.0 + 200.0);
  for (double lambda : {0.5, 1.0, 2.0}) {
    const auto r = classify(op, lambda);
    EXPECT_EQ(r.classification, Classification::oscillatory) << lambda;
  }
}

TEST(Classify, ResonantPotentialGivesCandidate) {
  const auto r = classify(wvn_op(400.0), 1.0);
  EXPECT_EQ(r.classification, Classification::l2_candidate);
  EXPECT_NEAR(r.envelope_exponent, oracle::resonance_exponent(-8.0), 0.15 * 2.0);
  EXPECT_GE(r.fit_r2, 0.9);
  EXPECT_GE(r.tail_mass_ratio, 0.0);
  EXPECT_LE(r.tail_mass_ratio, 1.0);
}

TEST(Classify, StableUnderDoublingTruncation) {
  const auto a = classify(wvn_op(400.0), 1.0), b = classify(wvn_op(800.0), 1.0);
  EXPECT_EQ(a.classification, Classification::l2_candidate);
  EXPECT_EQ(b.classification, Classification::l2_candidate);
  EXPECT_NEAR(a.envelope_exponent, b.envelope_exponent, 0.1 * b.envelope_exponent);
}

TEST(Classify, ShiftCovariance) {
  const auto op = wvn_op(300.0);
  for (double lambda : {0.6, 1.0, 1.7}) {
    const auto a = classify(op, lambda), b = classify(op.shifted(3.0), lambda + 3.0);
    EXPECT_EQ(a.classification, b.classification);
    EXPECT_NEAR(a.envelope_exponent, b.envelope_exponent, 1e-5);
    EXPECT_NEAR(a.tail_mass_ratio, b.tail_mass_ratio, 1e-5);
  }
}

TEST(Scan, DeterministicAcrossThreadCounts) {
  std::vector<RadialOperator> ops{wvn_op(200.0), free_op(0.0, 200.0)};
  const auto grid = arithmetic_grid(0.5, 1.5, 0.25);
  const auto a = scan(ops, grid, {}, 1), b = scan(ops, grid, {}, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].lambda, b[i].lambda);
    EXPECT_EQ(a[i].classification, b[i].classification);
    EXPECT_EQ(a[i].envelope_exponent, b[i].envelope_exponent);
    EXPECT_EQ(a[i].tail_mass_ratio, b[i].tail_mass_ratio);
  }
  const auto& hit = a[2];
  EXPECT_EQ(hit.classification, Classification::l2_candidate);
  ASSERT_TRUE(hit.refinement.has_value());
  EXPECT_EQ(hit.refinement->first, 0.75);
  EXPECT_EQ(hit.refinement->second, 1.25);
}

TEST(Refine, LocatesResonance) {
  const auto c = refine_candidate(wvn_op(1000.0), 0.8, 1.2);
  EXPECT_NEAR(c.lambda_star, 1.0, 0.02);
  EXPECT_GE(c.quality, 20.0);
}

TEST(Refine, FlatFunctionalIsABracketError) {
  EXPECT_THROW(refine_candidate(free_op(1.0, 400.0), 0.8, 1.2), BracketError);
  EXPECT_THROW(refine_candidate(free_op(1.0, 400.0), 1.2, 0.8), ParameterError);
}

TEST(EstimateDecay, SyntheticExponential) {
  std::vector<double> x, w;
  for (double t = 0.0; t <= 40.0; t += 0.01) {
    x.push_back(t);
    w.push_back(std::exp(-0.7 * t));
  }
  EXPECT_NEAR(estimate_decay(x, w, DecayModel::exponential).rate, 0.7, 0.007);
  EXPECT_NEAR(estimate_decay(x, w, DecayModel::exponential, 0.0, DecayMeasure::geometric_density).rate, 1.4, 0.014);
}

TEST(EstimateDecay, SyntheticPowerEnvelope) {
  std::vector<double> x, w;
  for (double t = 1.0; t <= 400.0; t += 0.02) {
    x.push_back(t);
    w.push_back(std::sin(t) / (t * t));
  }
  EXPECT_NEAR(estimate_decay(x, w, DecayModel::power, 10.0).rate, 2.0, 0.1);
}

TEST(EstimateDecay, ResonantSolution) {
  const auto op = wvn_op(1000.0);
  const auto t = subdominant_trajectory(op, 1.0);
  EXPECT_NEAR(estimate_decay(t, DecayModel::power).rate, 2.0, 0.1);
}

TEST(EstimateDecay, PoorFitIsAnEstimationError) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> x, w;
  for (int i = 1; i <= 500; ++i) {
    x.push_back(i);
    w.push_back(u(rng));
  }
  EXPECT_THROW(estimate_decay(x, w, DecayModel::power), EstimationError);
}
