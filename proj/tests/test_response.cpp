#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "levyfdt/errors.hpp"
#include "levyfdt/fokker_planck.hpp"
#include "levyfdt/response.hpp"

using namespace levyfdt;

namespace {

struct TanhWell {
  SdeModel model = models::tanh_well();
  Grid1D grid{32.0, 2048};
  Perturbation k = perturbations::inverse_quadratic();
  GridField p;
  AgarwalObservable ag;
  ConjugateSolution conj;

  TanhWell()
      : p(solve_stationary(model, grid).density),
        ag(agarwal_observable(p, k)),
        conj(solve_conjugate(model, p, k)) {}
};

const TanhWell& tw() {
  static const TanhWell s;
  return s;
}

ResponseSpec short_spec(double t_max = 2.0) {
  ResponseSpec s;
  s.t_grid = {0.1, t_max};
  return s;
}

double grid_quadrature(const GridField& a, const GridField& b, const GridField& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += a[i] * b[i] * p[i];
  return s * p.grid().spacing();
}

}  // namespace

TEST(ResponseMethod, RoundTripNames) {
  for (const auto& n : response_method_names()) EXPECT_EQ(to_string(parse_response_method(n)), n);
  EXPECT_THROW(parse_response_method("fdt"), InvalidArgument);
  EXPECT_NE(method_seed(1, ResponseMethod::agarwal), method_seed(1, ResponseMethod::seifert));
  EXPECT_EQ(method_seed(1, ResponseMethod::direct), method_seed(1, ResponseMethod::direct));
}

TEST(TimeGrid, Points) {
  const TimeGrid g{0.1, 5.0};
  ASSERT_EQ(g.size(), 51u);
  EXPECT_NEAR(g.points().back(), 5.0, 1e-12);
}

TEST(DifferenceStencil, ConstantsMapToZero) {
  const DifferenceStencil d(51, 0.1, 5);
  const std::vector<double> y(51, 0.123456789);
  for (double v : d.apply(y)) EXPECT_EQ(v, 0.0);
}

TEST(DifferenceStencil, ExactOnQuadratics) {
  const double dt = 0.1;
  for (std::size_t w : {3u, 5u, 7u}) {
    const DifferenceStencil d(30, dt, w);
    std::vector<double> y(30);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double t = dt * static_cast<double>(i);
      y[i] = 2.0 - t + 0.7 * t * t;
    }
    const auto r = d.apply(y);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i], -1.0 + 1.4 * dt * static_cast<double>(i), 1e-11) << i;
  }
}

TEST(DifferenceStencil, RejectsBadWindow) {
  EXPECT_THROW(DifferenceStencil(20, 0.1, 4), InvalidArgument);
  EXPECT_THROW(DifferenceStencil(20, 0.1, 1), InvalidArgument);
  EXPECT_THROW(DifferenceStencil(3, 0.1, 5), InvalidArgument);
}

TEST(Semigroup, InitialValueMatchesIntegrationByParts) {
  const auto& s = tw();
  const auto r = response_semigroup(s.model, s.p, s.k, observables::tanh_x(), {0.1, 1.0}, FpSolveSpec{});
  EXPECT_NEAR(r.values[0], response_at_zero(s.p, s.k, observables::tanh_x()), 1e-6);
  EXPECT_EQ(r.method, ResponseMethod::semigroup);
}

TEST(Semigroup, SignedFieldKeepsZeroMass) {
  const auto& s = tw();
  FpSolveSpec spec;
  spec.t_end = 5.0;
  const auto ev = evolve_signed(s.model, perturbation_adjoint(s.k, s.p), spec, 0.1);
  for (const auto& g : ev.snapshots) EXPECT_LT(std::abs(g.mass()), 1e-8);
}

TEST(Semigroup, ZeroFieldAndSignFlip) {
  const auto& s = tw();
  const TimeGrid tg{0.1, 2.0};
  const auto zero = response_semigroup(s.model, s.p, perturbations::none(), observables::tanh_x(), tg, FpSolveSpec{});
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  const auto a = response_semigroup(s.model, s.p, s.k, observables::tanh_x(), tg, FpSolveSpec{});
  const auto b = response_semigroup(s.model, s.p, s.k.scaled(-1.0), observables::tanh_x(), tg, FpSolveSpec{});
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], -b.values[i], 1e-15);
}

TEST(Direct, ZeroFieldGivesZero) {
  const auto& s = tw();
  const std::vector<double> eps{0.1, 0.05};
  const auto r = response_direct(s.model, perturbations::none(), observables::tanh_x(), eps, 500, short_spec(), 3);
  for (std::size_t i = 0; i < r.curve.values.size(); ++i) {
    EXPECT_EQ(r.curve.values[i], 0.0);
    EXPECT_EQ(r.curve.stderr_[i], 0.0);
  }
}

TEST(Direct, IdentityObservableConstantField) {
  // R(0) = int c * 1 * p_ss = c.
  const auto& s = tw();
  const double c = 0.5;
  auto spec = short_spec(1.0);
  spec.domain = Domain::whole_line;
  const std::vector<double> eps{0.1, 0.05};
  const auto r = response_direct(s.model, perturbations::constant(c), observables::identity(), eps, 4000, spec, 4);
  EXPECT_LT(std::abs(r.curve.values[0] - c), 3.0 * r.curve.stderr_[0] + 1e-3);
  bool flagged = false;
  for (const auto& n : r.curve.notes) flagged |= n.find("hypothes") != std::string::npos;
  EXPECT_TRUE(flagged);
}

TEST(Direct, RejectsBadEpsilonLadder) {
  const auto& s = tw();
  const std::vector<double> up{0.05, 0.1};
  EXPECT_THROW(response_direct(s.model, s.k, observables::tanh_x(), up, 100, short_spec(), 1), InvalidArgument);
  const std::vector<double> neg{0.1, -0.05};
  EXPECT_THROW(response_direct(s.model, s.k, observables::tanh_x(), neg, 100, short_spec(), 1), InvalidArgument);
}

TEST(Agarwal, InitialValueMatchesQuadrature) {
  const auto& s = tw();
  const auto r = response_agarwal(s.model, s.ag.Y, observables::tanh_x(), 20000, short_spec(0.5), 5);
  const auto o = GridField::sample(s.grid, [](double x) { return std::tanh(x); });
  const double q = grid_quadrature(o, s.ag.Y, s.p);
  EXPECT_LT(std::abs(r.values[0] - q), 3.0 * r.stderr_[0]);
}

TEST(Agarwal, ConstantObservableGivesZero) {
  const auto& s = tw();
  const auto r = response_agarwal(s.model, s.ag.Y, observables::constant(1.0), 5000, short_spec(1.0), 6);
  for (std::size_t i = 0; i < r.values.size(); ++i) EXPECT_LT(std::abs(r.values[i]), 3.0 * r.stderr_[i]);
}

TEST(Agarwal, DecaysAtLargeTime) {
  const auto& s = tw();
  auto spec = short_spec(30.0);
  spec.t_grid.dt = 1.0;
  spec.diff_dt = 0.5;
  const auto r = response_agarwal(s.model, s.ag.Y, observables::tanh_x(), 5000, spec, 7);
  ASSERT_NEAR(r.times.back(), 30.0, 1e-9);
  EXPECT_LT(std::abs(r.values.back()), 3.0 * r.stderr_.back());
}

TEST(Seifert, ConstantObservableIsExactlyZero) {
  const auto& s = tw();
  const auto r = response_seifert(s.model, s.conj.U, observables::constant(1.0), 2000, short_spec(1.0), 8);
  for (double v : r.values) EXPECT_EQ(v, 0.0);
}

TEST(Seifert, GaugeShiftOnlyAddsDifferencedMean) {
  // With the same trajectories, R[U + c] - R[U] = c R[1], and R[1] is the
  // differenced sample mean of O(X_t), which vanishes in expectation.
  const auto& s = tw();
  const double c = 2.5;
  GridField shifted = s.conj.U;
  for (double& v : shifted.values()) v += c;
  const GridField one(s.grid, std::vector<double>(s.grid.size(), 1.0));
  const auto spec = short_spec(1.0);
  const auto a = response_seifert(s.model, s.conj.U, observables::tanh_x(), 3000, spec, 9);
  const auto b = response_seifert(s.model, shifted, observables::tanh_x(), 3000, spec, 9);
  const auto m = response_seifert(s.model, one, observables::tanh_x(), 3000, spec, 9);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    EXPECT_NEAR(b.values[i] - a.values[i], c * m.values[i], 1e-10);
    EXPECT_LT(std::abs(m.values[i]), 3.0 * m.stderr_[i] + 1e-12);
  }
}

TEST(CompareCurves, TolerancesByKind) {
  ResponseCurve a, b;
  a.times = b.times = {0.0, 0.1};
  a.values = {0.0, 0.0};
  b.values = {0.015, 0.0};
  a.stderr_ = {0.003, 0.001};
  b.stderr_ = {0.004, 0.001};
  b.method = ResponseMethod::semigroup;
  const Tolerances tol;
  // 3 * hypot(0.003, 0.004) = 0.015.
  EXPECT_TRUE(compare_curves(a, b, CheckKind::mc_mc, tol, 0.0, 1.0).pass);
  b.values[0] = 0.0151;
  EXPECT_FALSE(compare_curves(a, b, CheckKind::mc_mc, tol, 0.0, 1.0).pass);
  EXPECT_TRUE(compare_curves(a, b, CheckKind::mc_pde, tol, 0.0, 1.0).pass);
  b.values[0] = 0.025;
  EXPECT_FALSE(compare_curves(a, b, CheckKind::mc_pde, tol, 0.0, 1.0).pass);
  EXPECT_TRUE(compare_curves(a, b, CheckKind::direct_pde, tol, 0.0, 1.0).pass);
  const auto c = compare_curves(a, b, CheckKind::direct_pde, tol, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(c.sup_diff, 0.025);
  EXPECT_DOUBLE_EQ(c.worst_t, 0.0);
  EXPECT_DOUBLE_EQ(c.tol, 3e-2);
  // Outside [t_lo, t_hi] nothing is compared.
  EXPECT_TRUE(compare_curves(a, b, CheckKind::mc_mc, tol, 0.05, 1.0).pass);
}

TEST(Verify, ZeroFieldScenario) {
  VerifyConfig cfg;
  cfg.scenario = "zero-field";
  cfg.perturbation = perturbations::none();
  cfg.n_traj = 2000;
  cfg.response.t_grid = {0.1, 2.0};
  const auto rep = verify_fdt(cfg);
  ASSERT_FALSE(rep.failure.has_value()) << *rep.failure;
  EXPECT_TRUE(rep.pass);
  ASSERT_EQ(rep.curves.size(), 4u);
  for (const auto& c : rep.curves) {
    for (double v : c.values) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(rep.checks.size(), 6u);
}

TEST(Verify, FlippedAgarwalObservableFails) {
  VerifyConfig cfg;
  cfg.n_traj = 5000;
  cfg.flip_y_sign = true;
  const auto rep = verify_fdt(cfg);
  ASSERT_FALSE(rep.failure.has_value()) << *rep.failure;
  EXPECT_FALSE(rep.pass);
  bool found = false;
  for (const auto& c : rep.checks) {
    if (c.a == "agarwal" && c.b == "semigroup") {
      found = true;
      EXPECT_FALSE(c.pass);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Verify, ReducedTanhWellScenarioPasses) {
  VerifyConfig cfg;
  cfg.n_traj = 20000;
  const auto rep = verify_fdt(cfg);
  ASSERT_FALSE(rep.failure.has_value()) << *rep.failure;
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.a << "-" << c.b << " sup " << c.sup_diff << " tol " << c.tol;
  EXPECT_NEAR(rep.r0_quadrature, rep.curves[3].values[0], 1e-6);
  EXPECT_EQ(rep.seeds.size(), 4u);
}
