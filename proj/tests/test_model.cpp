#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "levyfdt/errors.hpp"
#include "levyfdt/expr.hpp"
#include "levyfdt/model.hpp"

using namespace levyfdt;

TEST(Expression, PrecedenceAndFunctions) {
  const auto e = Expression::parse("-x^2 + 3*tanh(x)/sqrt(1 + x^2)", {"x"});
  for (double x : {-2.0, 0.0, 0.7, 5.0}) {
    EXPECT_NEAR(e(x), -x * x + 3.0 * std::tanh(x) / std::sqrt(1.0 + x * x), 1e-14);
  }
  EXPECT_NEAR(Expression::parse("2^3^2", {"x"})(0.0), 512.0, 1e-12);
  EXPECT_NEAR(Expression::parse("abs(x) - exp(1) + pi", {"x"})(-1.5),
              1.5 - std::numbers::e + std::numbers::pi, 1e-14);
}

TEST(Expression, SeveralVariables) {
  const auto e = Expression::parse("x1*x2 - x2", {"x1", "x2"});
  const std::vector<double> v{3.0, 2.0};
  EXPECT_DOUBLE_EQ(e(v), 4.0);
}

TEST(Expression, SyntaxErrors) {
  EXPECT_THROW(Expression::parse("x +", {"x"}), ConfigError);
  EXPECT_THROW(Expression::parse("(x", {"x"}), ConfigError);
  EXPECT_THROW(Expression::parse("y", {"x"}), ConfigError);
  EXPECT_THROW(Expression::parse("foo(x)", {"x"}), ConfigError);
}

TEST(Models, BuiltinDrifts) {
  const auto ou = models::stable_ou(2.0);
  EXPECT_DOUBLE_EQ(ou.drift_1d(1.5), -3.0);
  const auto tw = models::tanh_well(2.0);
  EXPECT_NEAR(tw.drift_1d(1.0), -2.0 / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(models::free_motion().drift_1d(4.0), 0.0);
  EXPECT_DOUBLE_EQ(tw.diffusion_1d(3.0), 1.0);
}

TEST(Models, CustomMatchesBuiltin) {
  const auto c = models::custom({"-2*x/sqrt(1+x^2)"}, {"1"}, 1.5);
  const auto tw = models::tanh_well();
  for (double x : {-7.0, -0.3, 0.0, 2.5}) EXPECT_NEAR(c.drift_1d(x), tw.drift_1d(x), 1e-15);
}

TEST(Models, CustomShapeErrors) {
  EXPECT_THROW(models::custom({"-x1"}, {"1"}, 1.5, 2), ConfigError);
  EXPECT_THROW(models::custom({"-x1", "-x2"}, {"1", "0", "0"}, 1.5, 2), ConfigError);
}

TEST(Perturbation, FiniteDifferenceDivergence) {
  const auto k = Perturbation::scalar("k", perturbations::unit_step(),
                                      [](double x) { return 1.0 / (1.0 + x * x); });
  EXPECT_FALSE(k.has_explicit_divergence());
  for (double x : {-3.0, -0.5, 0.0, 1.0, 10.0}) {
    const double exact = -2.0 * x / std::pow(1.0 + x * x, 2);
    EXPECT_NEAR(k.divergence_1d(x), exact, 1e-8);
  }
  const auto e = Perturbation::scalar("explicit", perturbations::unit_step(),
                                      [](double x) { return x * x; },
                                      [](double x) { return 2.0 * x; });
  EXPECT_TRUE(e.has_explicit_divergence());
  EXPECT_DOUBLE_EQ(e.divergence_1d(3.0), 6.0);
}

TEST(Perturbation, Profiles) {
  const auto step = perturbations::unit_step();
  EXPECT_DOUBLE_EQ(step(0.0), 1.0);
  EXPECT_DOUBLE_EQ(step(-0.1), 0.0);
  const auto imp = perturbations::mollified_impulse(0.5, 0.05);
  double area = 0.0;
  for (int i = 0; i < 20000; ++i) area += imp(1e-4 * (i + 0.5)) * 1e-4;
  EXPECT_NEAR(area, 1.0, 1e-6);
  EXPECT_FALSE(perturbations::constant(1.0).decays());
  EXPECT_TRUE(perturbations::inverse_quadratic().decays());
}

TEST(Audit, TanhWellDissipativityConstant) {
  const auto audit = audit_assumptions(models::tanh_well(2.0), ProbeSpec{}, 7);
  // inf of 2|x|/sqrt(1+x^2) over 1 <= |x| <= 50 is sqrt 2, at |x| = 1.
  EXPECT_GE(audit.dissipativity.k1, std::numbers::sqrt2 * 0.95);
  EXPECT_NEAR(audit.dissipativity.k1, std::numbers::sqrt2, 0.05 * std::numbers::sqrt2);
  EXPECT_GT(audit.dissipativity.annulus_probes, 0u);
}

TEST(Audit, IdentityDiffusionHasUnitEllipticity) {
  const auto audit = audit_assumptions(models::tanh_well(), ProbeSpec{}, 7);
  EXPECT_EQ(audit.ellipticity_lambda, 1.0);
  const auto audit2 = audit_assumptions(models::custom({"-x1", "-x2"}, {"1"}, 1.5, 2),
                                        ProbeSpec{.half_width = 10.0, .samples = 2000}, 3);
  EXPECT_EQ(audit2.ellipticity_lambda, 1.0);
}

TEST(Audit, ZeroDriftFailsDissipativity) {
  const auto audit = audit_assumptions(models::free_motion(), ProbeSpec{}, 7);
  EXPECT_LE(audit.dissipativity.k1, 0.0);
  EXPECT_EQ(audit.dissipativity.verdict, Verdict::fail);
}

TEST(Audit, SingularDiffusionIsAssumptionViolation) {
  const auto m = models::custom({"-x"}, {"0"}, 1.5);
  EXPECT_THROW(audit_assumptions(m, ProbeSpec{.half_width = 5.0, .samples = 100}, 1),
               AssumptionViolation);
}

TEST(Audit, DeterministicForSeed) {
  const auto a = audit_assumptions(models::tanh_well(), ProbeSpec{}, 42);
  const auto b = audit_assumptions(models::tanh_well(), ProbeSpec{}, 42);
  EXPECT_EQ(a.dissipativity.k1, b.dissipativity.k1);
  EXPECT_EQ(a.holder.drift_max_ratio, b.holder.drift_max_ratio);
  EXPECT_EQ(a.bounds.drift_sup, b.bounds.drift_sup);
  EXPECT_EQ(a.dissipativity.near_origin_worst, b.dissipativity.near_origin_worst);
}

TEST(Audit, DriftScalingScalesK1) {
  const auto base = models::tanh_well(2.0);
  const auto a = audit_assumptions(base, ProbeSpec{}, 5);
  for (double c : {0.5, 3.0}) {
    const auto b = audit_assumptions(base.with_scaled_drift(c), ProbeSpec{}, 5);
    EXPECT_NEAR(b.dissipativity.k1, c * a.dissipativity.k1, 1e-14 * c);
  }
}

TEST(Audit, LevyIntegralsEnterC1) {
  const auto audit = audit_assumptions(models::tanh_well(), ProbeSpec{}, 1);
  const auto& m = audit.dissipativity.moments;
  EXPECT_NEAR(audit.dissipativity.c1, m.small_jump_second + m.large_jump_first, 1e-14);
  // For a = 2 the constant C1 exceeds sqrt 2 k1, so (D) is not met.
  EXPECT_EQ(audit.dissipativity.verdict, Verdict::fail);
}
