#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "warpspec/conditions.hpp"
#include "warpspec/separation.hpp"

using namespace warpspec;

namespace {

EndGeometry end_of(WarpingProfile p, int n = 2, std::vector<double> spectrum = {0.0}) {
  const double r0 = p.r_min();
  return EndGeometry(n, r0, std::move(p), std::move(spectrum));
}

const Window kWindow{2.0, 200.0};

}  // namespace

TEST(HessianBand, IdenticalReferencePassesWithFullMargins) {
  const auto end = end_of(WarpingProfile::power_law(1.5));
  const auto e = check_hessian_band(end, WarpingProfile::power_law(1.5), 0.3, 0.2, kWindow);
  EXPECT_TRUE(e.pass);
  EXPECT_NEAR(e.worst_margin, 0.2, 1e-12);
  ASSERT_EQ(e.sides.size(), 2u);
  EXPECT_NEAR(e.sides[0].margin, 0.3, 1e-12);
}

TEST(HessianBand, SteeperReferenceFails) {
  // r (A_h - f'/f) = 1 - 2 = -1 against a = 0.5.
  const auto end = end_of(WarpingProfile::power_law(1.0));
  const auto e = check_hessian_band(end, WarpingProfile::power_law(2.0), 0.5, 0.5, kWindow);
  EXPECT_FALSE(e.pass);
  EXPECT_NEAR(e.worst_margin, -0.5, 1e-12);
  EXPECT_GE(e.argmin_r, kWindow.lo);
  EXPECT_LE(e.argmin_r, kWindow.hi);
}

TEST(HessianBand, CriticalProfileAgainstPowerDecayReference) {
  const auto end = end_of(make_critical_profile(0.75, 2.0));
  const auto ref = make_power_decay_reference(0.75);
  EXPECT_TRUE(check_hessian_band(end, ref, 2.0, 2.0, kWindow).pass);
  EXPECT_FALSE(check_hessian_band(end, ref, 1.9, 1.9, kWindow).pass);
}

TEST(MeanCurvatureBounds, PowerLawAndExponential) {
  const auto end = end_of(WarpingProfile::power_law(2.0));
  EXPECT_TRUE(check_A_bounds(end, 2.0, 2.0 / std::sqrt(kWindow.lo), kWindow).pass);
  EXPECT_FALSE(check_A_bounds(end, 2.0 + 1e-6, 10.0, kWindow).pass);
  const auto e = check_A_bounds(end_of(WarpingProfile::exp_power(1.0, 1.0)), 0.5, 3.0, kWindow);
  EXPECT_FALSE(e.pass);
  EXPECT_EQ(e.sides[1].side, "upper");
  EXPECT_LT(e.sides[1].margin, 0.0);
  EXPECT_DOUBLE_EQ(e.argmin_r, kWindow.hi);
}

TEST(Gap, Examples) {
  HypothesisConstants k;
  k.n = 2;
  k.A0 = 1;
  k.a = k.b = 0.05;
  EXPECT_TRUE(check_gap(k));
  k.a = k.A0;
  EXPECT_FALSE(check_gap(k));
  k.n = 5;
  k.A0 = 2;
  k.a = 0.1;
  k.b = 0.2;
  EXPECT_TRUE(check_gap(k));
  EXPECT_NEAR(gap_value(0.1, 0.2, 2.0, 5), 3.8 - 1.2, 1e-15);
}

TEST(VariationBound, PowerLaw) {
  const double theta = 1.5;
  const auto end = end_of(WarpingProfile::power_law(theta), 3);
  EXPECT_TRUE(check_K3(end, theta / kWindow.lo, kWindow).pass);
  EXPECT_FALSE(check_K3(end, 0.99 * theta / kWindow.lo, kWindow).pass);
  const auto flat = check_K3(end_of(WarpingProfile::power_law(1.0), 3), 1.0, {1.0, 100.0});
  EXPECT_TRUE(flat.pass);
  EXPECT_NEAR(flat.worst_margin, 0.0, 1e-12);
}

TEST(VariationBound, CriticalProfileNeedsTwiceK) {
  const auto end = end_of(make_critical_profile(0.75, 2.0));
  const auto fit = fit_constants(end, {100.0, 10000.0}, make_power_decay_reference(0.75));
  EXPECT_NEAR(fit.constants.K3, 2 * 2.0, 0.1);
}

TEST(RicciBound, Examples) {
  EXPECT_TRUE(check_ricci(end_of(WarpingProfile::power_law(1.0)), 1e-6, kWindow).pass);
  const auto crit = end_of(make_critical_profile(0.75, 2.0));
  const Window far{100.0, 10000.0};
  EXPECT_FALSE(check_ricci(crit, 3.5, far).pass);
  EXPECT_TRUE(check_ricci(crit, 4.5, far).pass);
  EXPECT_FALSE(check_ricci(end_of(WarpingProfile::exp_power(1.0, 2.0)), 10.0, kWindow).pass);
}

TEST(CurvatureBand, Examples) {
  const auto sqrt_end = end_of(WarpingProfile::power_law(0.5));
  const auto tight = check_curvature_band(sqrt_end, 0.5, {2.0, 256.0});
  EXPECT_TRUE(tight.pass);
  EXPECT_NEAR(tight.sides[0].margin, 0.0, 1e-12);
  EXPECT_TRUE(check_curvature_band(end_of(WarpingProfile::power_law(1.0)), 0.5, {2.0, 256.0}).pass);
  const auto crit = check_curvature_band(end_of(make_critical_profile(0.75, 2.0)), 0.5, {16.0, 4096.0});
  EXPECT_FALSE(crit.pass);
  EXPECT_EQ(crit.sides[1].side, "lower");
  EXPECT_LT(crit.sides[1].margin, 0.0);
  EXPECT_THROW(check_curvature_band(sqrt_end, 0.5, {2.0, 10.0}), WindowError);
}

TEST(DecaySplit, FlatSpaceAllClausesPass) {
  const auto end = end_of(WarpingProfile::power_law(1.0), 3, {0.0, 2.0});
  const auto op = RadialOperator::from_end(end, 1, 1024.0);
  const auto rep = agmon_split(sample_potential(op, {1.0, 1024.0}));
  EXPECT_TRUE(rep.pass());
  EXPECT_TRUE(rep.short_range.negligible);
  EXPECT_NEAR(rep.long_range.decay_exponent, 2.0, 0.1);
}

TEST(DecaySplit, SublinearPowerLaw) {
  const auto end = end_of(WarpingProfile::power_law(0.6), 2, {0.0, 1.0});
  const auto op = RadialOperator::from_end(end, 1, 1024.0);
  const auto rep = agmon_split(sample_potential(op, {1.0, 1024.0}));
  EXPECT_TRUE(rep.pass());
  EXPECT_NEAR(rep.short_range.decay_exponent, 1.0, 0.1);
  EXPECT_NEAR(rep.long_range.decay_exponent, 1.2, 0.1);
  EXPECT_NEAR(rep.long_range_slope.decay_exponent, 1.2, 0.1);
}

TEST(DecaySplit, CriticalProfileFailsShortRange) {
  const auto end = end_of(make_critical_profile(0.75, 6.0), 2, {0.0, 1.0});
  const auto op = RadialOperator::from_end(end, 0, 4096.0);
  const auto rep = agmon_split(sample_potential(op, {16.0, 4096.0}));
  EXPECT_FALSE(rep.short_range.pass);
  EXPECT_FALSE(rep.pass());
}

TEST(DecaySplit, ExponentsStableUnderGridDoubling) {
  const auto end = end_of(WarpingProfile::power_law(0.6), 2, {0.0, 1.0});
  const auto op = RadialOperator::from_end(end, 1, 1024.0);
  GridOptions coarse, fine;
  coarse.points_per_unit = 16;
  fine.points_per_unit = 32;
  const auto a = agmon_split(sample_potential(op, {1.0, 1024.0}, coarse));
  const auto b = agmon_split(sample_potential(op, {1.0, 1024.0}, fine));
  EXPECT_NEAR(a.short_range.decay_exponent, b.short_range.decay_exponent, 0.05 * b.short_range.decay_exponent);
  EXPECT_NEAR(a.long_range_slope.decay_exponent, b.long_range_slope.decay_exponent,
              0.05 * b.long_range_slope.decay_exponent);
}

TEST(FitConstants, PowerLawClosedForms) {
  const double theta = 1.5;
  const auto fit = fit_constants(end_of(WarpingProfile::power_law(theta)), kWindow, WarpingProfile::power_law(theta));
  EXPECT_EQ(fit.constants.a, 1e-12);
  EXPECT_EQ(fit.constants.b, 1e-12);
  EXPECT_NEAR(fit.constants.A0, theta, 1e-12);
  EXPECT_NEAR(fit.constants.K3, theta / kWindow.lo, 1e-12);
  EXPECT_TRUE(fit.satisfiable);
  EXPECT_TRUE(fit.gap);
  ASSERT_TRUE(fit.constants.theta.has_value());
}

TEST(FitConstants, FlatSpace) {
  const auto fit = fit_constants(end_of(WarpingProfile::power_law(1.0)), kWindow, WarpingProfile::power_law(1.0));
  EXPECT_NEAR(fit.constants.A0, 1.0, 1e-12);
}

TEST(FitConstants, CriticalProfile) {
  const auto fit = fit_constants(end_of(make_critical_profile(0.75, 2.0)), {100.0, 10000.0},
                                 make_power_decay_reference(0.75));
  EXPECT_NEAR(fit.constants.a, 2.0, 1e-3);
  EXPECT_NEAR(fit.constants.b, 2.0, 1e-3);
  EXPECT_NEAR(fit.constants.b1, 4.0, 0.4);
}

TEST(FitConstants, UnsatisfiableWhenMeanCurvatureNotPositive) {
  const auto fit = fit_constants(end_of(make_critical_profile(0.75, 6.0)), {2.0, 50.0}, make_power_decay_reference(0.75));
  EXPECT_FALSE(fit.satisfiable);
  EXPECT_FALSE(fit.gap);
}

TEST(FitConstants, FittedBundlePassesEveryCheck) {
  for (const auto& prof : {WarpingProfile::power_law(0.7), WarpingProfile::power_law(2.0),
                           make_critical_profile(0.75, 2.0)}) {
    const auto end = end_of(prof, 3);
    const auto ref = prof.kind() == ProfileKind::power_law ? prof : make_power_decay_reference(0.75);
    const Window w{100.0, 2000.0};
    const auto k = fit_constants(end, w, ref).constants;
    EXPECT_TRUE(check_hessian_band(end, ref, k.a, k.b, w).pass) << prof.describe();
    EXPECT_TRUE(check_A_bounds(end, k.A0, k.B0, w).pass) << prof.describe();
    EXPECT_TRUE(check_K3(end, k.K3, w).pass) << prof.describe();
    EXPECT_TRUE(check_ricci(end, k.b1, w).pass) << prof.describe();
  }
}

TEST(Checks, MonotoneInTheirConstants) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto end = end_of(make_critical_profile(0.75, 2.0), 3);
  const auto ref = make_power_decay_reference(0.75);
  const Window w{20.0, 400.0};
  for (int i = 0; i < 50; ++i) {
    const double a = 4 * u(rng), b = 4 * u(rng), A0 = 3 * u(rng), B0 = 3 * u(rng);
    const double K3 = 6 * u(rng), b1 = 6 * u(rng), s = 1.0 + u(rng);
    if (check_hessian_band(end, ref, a, b, w).pass) EXPECT_TRUE(check_hessian_band(end, ref, s * a, s * b, w).pass);
    if (check_A_bounds(end, A0, B0, w).pass) EXPECT_TRUE(check_A_bounds(end, A0 / s, s * B0, w).pass);
    if (check_K3(end, K3, w).pass) EXPECT_TRUE(check_K3(end, s * K3, w).pass);
    if (check_ricci(end, b1, w).pass) EXPECT_TRUE(check_ricci(end, s * b1, w).pass);
    EXPECT_LE(check_K3(end, K3, w).worst_margin, check_K3(end, s * K3, w).worst_margin);
    EXPECT_LE(check_ricci(end, b1, w).worst_margin, check_ricci(end, s * b1, w).worst_margin);
  }
}

TEST(Checks, WindowErrors) {
  const auto end = end_of(WarpingProfile::power_law(1.0));
  EXPECT_THROW(check_K3(end, 1.0, {0.5, 10.0}), WindowError);
  EXPECT_THROW(check_K3(end, 1.0, {10.0, 5.0}), WindowError);
  const auto sampled = end_of(WarpingProfile::sampled({1, 2, 3, 4}, {1, 2, 3, 4}));
  EXPECT_THROW(check_ricci(sampled, 1.0, {1.0, 10.0}), WindowError);
}
