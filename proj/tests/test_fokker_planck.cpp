#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "levyfdt/errors.hpp"
#include "levyfdt/fokker_planck.hpp"
#include "levyfdt/nonlocal.hpp"
#include "oracles.hpp"

using namespace levyfdt;
namespace lt = levyfdt::testing;

namespace {

const Grid1D& std_grid() {
  static const Grid1D g(32.0, 2048);
  return g;
}

const StationaryResult& tanh_well_ss() {
  static const StationaryResult r = solve_stationary(models::tanh_well(), std_grid());
  return r;
}

const AdjointSystem& tanh_well_system() {
  static const AdjointSystem s(models::tanh_well(), std_grid());
  return s;
}

GridField narrow_bump(const Grid1D& g, double x0, double sd) {
  auto p = GridField::sample(g, [&](double x) { return std::exp(-0.5 * (x - x0) * (x - x0) / (sd * sd)); },
                             FieldKind::density);
  p.normalize();
  return p;
}

}  // namespace

TEST(FpSolveSpec, Validation) {
  FpSolveSpec s;
  EXPECT_NO_THROW(s.validate());
  s.dt = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  EXPECT_EQ(parse_fp_method("explicit-rk"), FpMethod::explicit_rk);
  EXPECT_THROW(parse_fp_method("crank"), InvalidArgument);
}

TEST(EvolveDensity, FreeBumpMatchesStableKernel) {
  const auto& g = std_grid();
  const double t = 1.0;
  FpSolveSpec spec;
  spec.t_end = t;
  const auto ev = evolve_density(models::free_motion(), narrow_bump(g, 0.0, 1.5 * g.spacing()), spec);
  const auto& p = ev.snapshots.back();
  const double s = std::pow(t, 1.0 / 1.5);
  double l1 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    l1 += std::abs(p[i] - lt::cf_inverse_density(1.5, g.x(i) / s, 1.0, 1e-3) / s);
  }
  EXPECT_LT(l1 * g.spacing(), 1e-2);
}

TEST(EvolveDensity, MassConservedPerStep) {
  const auto& g = std_grid();
  FpSolveSpec spec;
  spec.t_end = 2.0;
  const auto ev = evolve_density(models::tanh_well(), narrow_bump(g, 1.0, 0.5), spec);
  EXPECT_LE(ev.max_step_mass_change, 1e-8);
}

TEST(EvolveDensity, StationaryDensityIsFixed) {
  const auto& p = tanh_well_ss().density;
  FpSolveSpec spec;
  spec.t_end = 5.0;
  const auto ev = evolve_density(models::tanh_well(), p, spec, std::nullopt, 1.0);
  ASSERT_EQ(ev.snapshots.size(), 6u);
  for (const auto& snap : ev.snapshots) EXPECT_LT(l1_distance(snap, p), 1e-6);
}

TEST(EvolveDensity, OneUnitChangeBelowTwiceStopTol) {
  const auto& p = tanh_well_ss().density;
  FpSolveSpec spec;
  spec.t_end = 1.0;
  const auto ev = evolve_density(models::tanh_well(), p, spec);
  EXPECT_LT(l1_distance(ev.snapshots.back(), p), 2.0 * spec.stop_tol);
}

TEST(EvolveDensity, ReflectionSymmetry) {
  const auto& g = std_grid();
  auto p0 = GridField::sample(g, [](double x) {
    return std::exp(-0.5 * x * x) + 0.5 * std::exp(-(x - 3.0) * (x - 3.0)) + 0.5 * std::exp(-(x + 3.0) * (x + 3.0));
  },
                              FieldKind::density);
  p0.normalize();
  FpSolveSpec spec;
  spec.t_end = 2.0;
  const auto ev = evolve_density(models::tanh_well(), p0, spec, std::nullopt, 0.5);
  for (const auto& snap : ev.snapshots) {
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(snap[i], snap[mirror_index(g, i)], 1e-10);
  }
}

TEST(EvolveDensity, RejectsUnnormalizedStart) {
  const auto& g = std_grid();
  GridField p(g, std::vector<double>(g.size(), 1.0), FieldKind::density);
  EXPECT_THROW(evolve_density(models::tanh_well(), p, FpSolveSpec{}), InvalidArgument);
}

TEST(EvolveDensity, ExplicitMethodAgrees) {
  const auto& g = std_grid();
  FpSolveSpec a;
  a.t_end = 0.5;
  FpSolveSpec b = a;
  b.method = FpMethod::explicit_rk;
  const auto p0 = narrow_bump(g, 0.5, 0.5);
  const auto ea = evolve_density(models::tanh_well(), p0, a);
  const auto eb = evolve_density(models::tanh_well(), p0, b);
  EXPECT_EQ(eb.method_used, FpMethod::explicit_rk);
  EXPECT_LT(l1_distance(ea.snapshots.back(), eb.snapshots.back()), 1e-6);
}

TEST(SolveStationary, StableOuMatchesFourierOracle) {
  const auto& g = std_grid();
  const auto r = solve_stationary(models::stable_ou(), g);
  double l1 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) l1 += std::abs(r.density[i] - lt::cf_inverse_density(1.5, g.x(i), 1.5, 1e-3));
  EXPECT_LT(l1 * g.spacing(), 1e-2);
  EXPECT_LE(r.log.final_residual, FpSolveSpec{}.stop_tol);
  EXPECT_LT(r.log.boundary_mass, 1e-2);
}

TEST(SolveStationary, FreeMotionIsUniform) {
  const auto& g = std_grid();
  const auto r = solve_stationary(models::free_motion(), g);
  for (double v : r.density.values()) EXPECT_NEAR(v, 1.0 / 64.0, 1e-10);
  EXPECT_FALSE(r.log.confining);
  EXPECT_FALSE(r.log.warnings.empty());
}

TEST(SolveStationary, BoundaryBreachOnSmallGrid) {
  const Grid1D g(4.0, 256);
  EXPECT_THROW(solve_stationary(models::tanh_well(), g), SolveFailure);
  try {
    solve_stationary(models::tanh_well(), g);
  } catch (const SolveFailure& e) {
    EXPECT_GT(e.log().boundary_mass, e.log().boundary_mass_limit);
  }
}

TEST(SolveStationary, TanhWellProperties) {
  const auto& r = tanh_well_ss();
  EXPECT_NEAR(r.density.mass(), 1.0, 1e-12);
  EXPECT_GE(r.density.min(), 0.0);
  EXPECT_LE(r.log.final_residual, 1e-7);
  EXPECT_LT(r.log.boundary_mass, 1e-2);
  EXPECT_GT(r.log.rcond, AdjointSystem::kSingularRcond);
}

TEST(Conjugate, ZeroFieldGivesZero) {
  const auto sol = solve_conjugate(tanh_well_system(), tanh_well_ss().density, perturbations::none());
  for (double v : sol.v.values()) EXPECT_EQ(v, 0.0);
  for (double v : sol.U.values()) EXPECT_EQ(v, 0.0);
}

TEST(Conjugate, ResidualAndGauge) {
  const auto& p = tanh_well_ss().density;
  const auto sol = solve_conjugate(tanh_well_system(), p, perturbations::inverse_quadratic());
  // Independent residual with the spectral operators.
  const auto av = apply_adjoint(models::tanh_well(), sol.v);
  const auto g = perturbation_adjoint(perturbations::inverse_quadratic(), p);
  double num = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) num += std::abs(av[i] - g[i]);
  EXPECT_LT(num * p.grid().spacing() / g.l1_norm(), 1e-6);
  EXPECT_LT(sol.residual, 1e-6);
  EXPECT_LT(std::abs(sol.v.mass()), 1e-8);
  EXPECT_LT(std::abs(sol.compatibility_mass), kCompatibilityTol);
}

TEST(Conjugate, GaugeProjectionIsIdempotent) {
  const auto& p = tanh_well_ss().density;
  const auto sol = solve_conjugate(tanh_well_system(), p, perturbations::inverse_quadratic());
  for (double c : {-3.0, 0.25, 10.0}) {
    GridField shifted(p.grid());
    for (std::size_t i = 0; i < p.size(); ++i) shifted[i] = sol.v[i] + c * p[i];
    const auto back = gauge_mass_zero(shifted, p);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back[i], sol.v[i], 1e-10);
  }
}

TEST(Conjugate, UShiftsByConstant) {
  const auto& p = tanh_well_ss().density;
  const auto sol = solve_conjugate(tanh_well_system(), p, perturbations::inverse_quadratic());
  const double c = 0.7;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (sol.floor.floored[i]) continue;
    const double u2 = (sol.v[i] + c * p[i]) / p[i];
    EXPECT_NEAR(u2 - sol.U[i], c, 1e-12);
  }
}

TEST(Conjugate, CompatibilityHoldsOnPeriodicGrid) {
  // The spectral derivative has no zero mode, so L* p carries no mass even
  // for a K that does not decay.
  const auto& p = tanh_well_ss().density;
  const auto k = Perturbation::scalar("ramp", perturbations::unit_step(), [](double x) { return x; });
  EXPECT_LT(std::abs(perturbation_adjoint(k, p).mass()), kCompatibilityTol);
}

TEST(Agarwal, GaussianWithConstantField) {
  const Grid1D g(16.0, 1024);
  auto p = GridField::sample(g, [](double x) { return std::exp(-x * x); }, FieldKind::density);
  p.normalize();
  const double c = 0.8;
  const auto y = agarwal_observable(p, perturbations::constant(c));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.x(i)) > 2.0) continue;
    EXPECT_NEAR(y.Y[i], 2.0 * c * g.x(i), 1e-6);
  }
}

TEST(Agarwal, StationaryMeanZero) {
  const Grid1D g(16.0, 1024);
  for (double w : {0.5, 1.0, 2.0}) {
    auto p = GridField::sample(g, [&](double x) { return 1.0 / std::pow(1.0 + (x / w) * (x / w), 1.2); },
                               FieldKind::density);
    p.normalize();
    const auto y = agarwal_observable(p, perturbations::inverse_quadratic());
    EXPECT_LT(std::abs(y.construction_check), 1e-8);
  }
  const auto y = agarwal_observable(tanh_well_ss().density, perturbations::inverse_quadratic());
  EXPECT_LT(std::abs(y.construction_check), 1e-8);
}

TEST(Agarwal, TanhWellMatchesFiniteDifferences) {
  const auto& p = tanh_well_ss().density;
  const auto& g = p.grid();
  const auto y = agarwal_observable(p, perturbations::inverse_quadratic());
  const double h = g.spacing();
  const std::size_t n = g.size();
  std::vector<double> kp(n);
  for (std::size_t i = 0; i < n; ++i) kp[i] = p[i] / (1.0 + g.x(i) * g.x(i));
  double worst = 0.0;
  for (std::size_t i = 4; i + 4 < n; ++i) {
    if (std::abs(g.x(i)) > 8.0 || y.floor.floored[i]) continue;
    // Fourth-order centred difference.
    const double d = (-kp[i + 2] + 8.0 * kp[i + 1] - 8.0 * kp[i - 1] + kp[i - 2]) / (12.0 * h);
    worst = std::max(worst, std::abs(y.Y[i] + d / p[i]));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Agarwal, FloorDominatedInputIsError) {
  const Grid1D g(32.0, 2048);
  auto p = GridField::sample(g, [](double x) { return std::exp(-100.0 * x * x) + (std::abs(x) > 0.5 ? 9e-4 : 0.0); },
                             FieldKind::density);
  p.normalize();
  EXPECT_THROW(agarwal_observable(p, perturbations::inverse_quadratic()), NumericalError);
}

TEST(PositivityFloor, ShareByMass) {
  const auto info = positivity_floor(tanh_well_ss().density);
  EXPECT_GT(info.count, 0u);
  EXPECT_LT(info.mass_share, kMaxFlooredShare);
  EXPECT_NEAR(info.floor, kPositivityFloor * tanh_well_ss().density.max(), 1e-18);
}
