#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levyfdt/errors.hpp"
#include "levyfdt/nonlocal.hpp"
#include "levyfdt/rng.hpp"
#include "oracles.hpp"

using namespace levyfdt;
namespace lt = levyfdt::testing;
namespace bq = boost::math::quadrature;

namespace {

/// Sum of a few Gaussians with random centres, widths and signs.
GridField random_smooth(const Grid1D& g, RngStream& s) {
  std::vector<double> c, w, a;
  for (int k = 0; k < 4; ++k) {
    c.push_back(s.uniform(-10.0, 10.0));
    w.push_back(s.uniform(0.7, 3.0));
    a.push_back(s.uniform(-1.0, 1.0));
  }
  return GridField::sample(g, [&](double x) {
    double v = 0.0;
    for (int k = 0; k < 4; ++k) v += a[k] * std::exp(-(x - c[k]) * (x - c[k]) / (w[k] * w[k]));
    return v;
  });
}

/// (-Delta)^{alpha/2} of the 2L-periodic extension of exp(-x^2), from the
/// singular-integral definition c int (2 f(x) - f(x+y) - f(x-y)) / y^{1+alpha} dy
/// over y > 0 for the central copy plus the far images of the other copies.
double pv_gaussian(double x, double alpha, double L) {
  const double c = lt::levy_constant_closed_form(alpha, 1);
  const double fx = std::exp(-x * x);
  // 2 f(x) - f(x+y) - f(x-y) = -2 f(x) expm1(-y^2 + log cosh(2xy)), written to
  // keep full relative accuracy as y -> 0.
  auto second_diff = [&](double y) {
    const double z = 2.0 * x * y;
    const double sh = std::sinh(0.5 * std::abs(z));
    const double log_cosh = std::log1p(2.0 * sh * sh);
    return -2.0 * fx * std::expm1(-y * y + log_cosh);
  };
  bq::tanh_sinh<double> ts;
  const double near = ts.integrate([&](double y) { return y < 1e-100 ? 0.0 : second_diff(y) * std::pow(y, -1.0 - alpha); },
                                   0.0, 1.0);
  // On y >= 1: the 2 f(x) part is explicit, the shifted copies are integrated.
  auto shifted = [&](double y) {
    return (std::exp(-(x + y) * (x + y)) + std::exp(-(x - y) * (x - y))) * std::pow(y, -1.0 - alpha);
  };
  double far = 2.0 * fx / alpha;
  for (double a = 1.0; a < 40.0; a += 1.0) far -= bq::gauss_kronrod<double, 31>::integrate(shifted, a, a + 1.0, 5, 1e-14);
  // Images at x + 2Lk contribute -c int exp(-u^2) / |x - u + 2Lk|^{1+alpha} du.
  double images = 0.0;
  for (int k = 1; k <= 4000; ++k) {
    for (int sgn : {-1, 1}) {
      const double shift = sgn * 2.0 * L * k;
      images += bq::gauss<double, 30>::integrate(
          [&](double u) { return std::exp(-u * u) * std::pow(std::abs(x - u + shift), -1.0 - alpha); }, -9.0,
          9.0);
    }
  }
  // Remainder of the image sum beyond k = 4000 (both signs), sqrt(pi) |2Lk|^{-1-alpha}.
  const double kmax = 4000.5;
  images += 2.0 * std::sqrt(std::numbers::pi) * std::pow(2.0 * L, -1.0 - alpha) * std::pow(kmax, -alpha) / alpha;
  return c * (near + far - images);
}

}  // namespace

TEST(Grid1D, Validation) {
  EXPECT_THROW(Grid1D(0.0, 1024), InvalidArgument);
  EXPECT_THROW(Grid1D(8.0, 1000), InvalidArgument);
  EXPECT_THROW(Grid1D(8.0, 32), InvalidArgument);
  const Grid1D g(32.0, 2048);
  EXPECT_DOUBLE_EQ(g.spacing(), 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(g.x(0), -32.0);
  EXPECT_DOUBLE_EQ(g.frequency(3), 3.0 * std::numbers::pi / 32.0);
  EXPECT_DOUBLE_EQ(g.frequency(2047), -std::numbers::pi / 32.0);
}

TEST(GridField, SamplingKeepsParity) {
  const Grid1D g(8.0, 256);
  const auto odd = GridField::sample(g, [](double x) { return std::tanh(x); });
  const auto even = GridField::sample(g, [](double x) { return 1.0 / (1.0 + x * x); });
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(odd[i], -odd[mirror_index(g, i)]);
    EXPECT_EQ(even[i], even[mirror_index(g, i)]);
  }
}

TEST(GridField, InterpolationAndNormalization) {
  const Grid1D g(4.0, 64);
  auto f = GridField::sample(g, [](double x) { return 2.0 * x + 1.0; });
  EXPECT_NEAR(f.interpolate(0.3), 1.6, 1e-12);
  GridField p(g, std::vector<double>(64, 3.0), FieldKind::density);
  p.normalize();
  EXPECT_NEAR(p.mass(), 1.0, 1e-15);
  GridField z(g, FieldKind::density);
  EXPECT_THROW(z.normalize(), NumericalError);
  GridField neg(g, std::vector<double>(64, -1e-3), FieldKind::density);
  EXPECT_THROW(neg.check_density(), NumericalError);
}

TEST(FractionalLaplacian, CosineEigenfunction) {
  const Grid1D g(32.0, 2048);
  const double xi3 = g.frequency(3);
  for (double alpha : {1.2, 1.5, 1.8}) {
    const auto f = GridField::sample(g, [&](double x) { return std::cos(xi3 * x); });
    const auto lf = fractional_laplacian(f, alpha);
    const double lambda = std::pow(xi3, alpha);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(lf[i], lambda * f[i], 1e-10);
  }
}

TEST(FractionalLaplacian, ConstantsVanish) {
  const Grid1D g(32.0, 2048);
  const GridField f(g, std::vector<double>(2048, 4.25));
  for (double v : fractional_laplacian(f, 1.5).values()) EXPECT_NEAR(v, 0.0, 1e-13);
}

TEST(FractionalLaplacian, GaussianAgainstPrincipalValueQuadrature) {
  const Grid1D g(32.0, 2048);
  const double alpha = 1.5;
  const auto f = GridField::sample(g, [](double x) { return std::exp(-x * x); });
  const auto lf = fractional_laplacian(f, alpha);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); i += 4) {
    const double x = g.x(i);
    if (std::abs(x) > 8.0) continue;
    worst = std::max(worst, std::abs(lf[i] - pv_gaussian(x, alpha, g.half_width())));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(FractionalLaplacian, LinearAndShiftEquivariant) {
  const Grid1D g(16.0, 1024);
  RngStream s(3);
  const auto a = random_smooth(g, s);
  const auto b = random_smooth(g, s);
  GridField comb(g);
  for (std::size_t i = 0; i < g.size(); ++i) comb[i] = 2.0 * a[i] - 0.5 * b[i];
  const auto la = fractional_laplacian(a, 1.5);
  const auto lb = fractional_laplacian(b, 1.5);
  const auto lc = fractional_laplacian(comb, 1.5);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(lc[i], 2.0 * la[i] - 0.5 * lb[i], 1e-12);

  for (std::size_t shift : {1u, 7u, 300u}) {
    GridField rolled(g);
    for (std::size_t i = 0; i < g.size(); ++i) rolled[(i + shift) % g.size()] = a[i];
    const auto lr = fractional_laplacian(rolled, 1.5);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(lr[(i + shift) % g.size()], la[i], 1e-10);
  }
}

TEST(SpectralDerivative, ExactOnGridModes) {
  const Grid1D g(8.0, 256);
  const double xi = g.frequency(5);
  const auto f = GridField::sample(g, [&](double x) { return std::sin(xi * x); });
  const auto d = spectral_derivative(f);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(d[i], xi * std::cos(xi * g.x(i)), 1e-11);
}

TEST(Generator, KillsConstants) {
  const Grid1D g(32.0, 2048);
  const GridField one(g, std::vector<double>(2048, 1.0));
  for (const auto& m : {models::tanh_well(), models::stable_ou(),
                        models::custom({"-x/(1+x^2)"}, {"1 + 0.5/(1+x^2)"}, 1.5)}) {
    for (double v : apply_generator(m, one).values()) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(Generator, FreeMotionReducesToFractionalLaplacian) {
  const Grid1D g(32.0, 2048);
  const double xi = g.frequency(4);
  const auto u = GridField::sample(g, [&](double x) { return std::cos(xi * x); });
  const auto au = apply_generator(models::free_motion(), u);
  const auto as = apply_adjoint(models::free_motion(), u);
  const double lambda = std::pow(xi, 1.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(au[i], -lambda * u[i], 1e-10);
    EXPECT_NEAR(as[i], -lambda * u[i], 1e-10);
  }
}

TEST(Generator, StableOuOnCosineAgainstQuadrature) {
  // L = 10 pi makes xi = 1 a grid frequency.
  const Grid1D g(10.0 * std::numbers::pi, 1024);
  const double alpha = 1.5;
  const auto u = GridField::sample(g, [](double x) { return std::cos(x); });
  const auto au = apply_generator(models::stable_ou(), u);
  // Jump part: c int (cos(x + y) - cos x) / |y|^{1+alpha} dy = -cos(x) * q.
  const double c = lt::levy_constant_closed_form(alpha, 1);
  bq::tanh_sinh<double> ts;
  double q = ts.integrate([&](double y) { return y < 1e-100 ? 0.0 : 2.0 * std::pow(std::sin(0.5 * y), 2) * std::pow(y, -1.0 - alpha); },
                          0.0, 1.0);
  for (double a = 1.0; a < 2000.0; a += 2.0 * std::numbers::pi) {
    q += bq::gauss_kronrod<double, 61>::integrate(
        [&](double y) { return (1.0 - std::cos(y)) * std::pow(y, -1.0 - alpha); }, a,
        a + 2.0 * std::numbers::pi, 5, 1e-14);
  }
  // Tail beyond the last panel: (1 - cos) averages to 1.
  const double last = 1.0 + 2.0 * std::numbers::pi * std::ceil((2000.0 - 1.0) / (2.0 * std::numbers::pi));
  q += std::pow(last, -alpha) / alpha;
  q *= 2.0 * c;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    if (i == 0) continue;  // shared endpoint carries the drift jump of b = -x
    const double oracle = -x * -std::sin(x) - q * std::cos(x);
    EXPECT_NEAR(au[i], oracle, 1e-6) << x;
  }
}

TEST(Adjoint, DualityOnRandomPairs) {
  const Grid1D g(32.0, 2048);
  const std::vector<SdeModel> ms{models::tanh_well(),
                                 models::custom({"-x/(1+x^2)"}, {"1 + 0.5/(1+x^2)"}, 1.5)};
  RngStream s(41);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto& m = ms[k % 2];
    const auto u = random_smooth(g, s);
    const auto phi = random_smooth(g, s);
    const double lhs = apply_generator(m, u).inner(phi);
    const double rhs = u.inner(apply_adjoint(m, phi));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Adjoint, MassAnnihilation) {
  const Grid1D g(32.0, 2048);
  RngStream s(42);
  for (const auto& m : {models::tanh_well(), models::stable_ou(),
                        models::custom({"-x/(1+x^2)"}, {"1 + 0.5/(1+x^2)"}, 1.5)}) {
    for (int k = 0; k < 10; ++k) {
      const auto phi = random_smooth(g, s);
      const auto a = apply_adjoint(m, phi);
      EXPECT_LT(std::abs(a.mass()), 1e-8 * phi.l1_norm());
    }
  }
}

TEST(Adjoint, AliasingWarning) {
  const Grid1D g(8.0, 256);
  RngStream s(5);
  GridField noisy = GridField::sample(g, [](double x) { return std::exp(-x * x); });
  for (double& v : noisy.values()) v += 1e-2 * s.uniform(-1.0, 1.0);
  OperatorDiagnostics diag;
  apply_adjoint(models::tanh_well(), noisy, &diag);
  EXPECT_GT(diag.high_frequency_fraction, kAliasingThreshold);
  EXPECT_FALSE(diag.warnings.empty());

  OperatorDiagnostics clean;
  apply_adjoint(models::tanh_well(), GridField::sample(g, [](double x) { return std::exp(-x * x); }), &clean);
  EXPECT_TRUE(clean.warnings.empty());
}

TEST(HeatKernel, FreeMotionWithinBand) {
  const auto rep = heat_kernel_diagnostic(models::free_motion(), 0.05, 0.0);
  EXPECT_TRUE(rep.finite);
  EXPECT_TRUE(rep.within_band) << rep.ratio_min << " " << rep.ratio_max;
  EXPECT_GE(rep.ratio_min, 0.1);
  EXPECT_LE(rep.ratio_max, 10.0);
  EXPECT_NEAR(rep.peak_ratio / rep.expected_peak_ratio, 1.0, 0.05);
}

TEST(HeatKernel, FreeMotionMatchesRescaledOracle) {
  // At t = 0.05 the bump is spread over many cells; compare the peak with
  // t^{-1/alpha} f(0).
  const double t = 0.05;
  const auto rep = heat_kernel_diagnostic(models::free_motion(), t, 0.0);
  const double oracle = std::pow(t, -1.0 / 1.5) * lt::cf_inverse_density(1.5, 0.0);
  EXPECT_NEAR(rep.peak_t / oracle, 1.0, 2e-2);
}

TEST(HeatKernel, TanhWellBandIsFinite) {
  const auto rep = heat_kernel_diagnostic(models::tanh_well(), 0.05, 0.5);
  EXPECT_TRUE(rep.finite);
  EXPECT_GT(rep.ratio_min, 0.0);
  EXPECT_TRUE(std::isfinite(rep.ratio_max));
}
