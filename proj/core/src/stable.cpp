#include "levyfdt/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levyfdt/errors.hpp"

namespace levyfdt {

namespace {

constexpr double kPi = std::numbers::pi;

// exp(-xi^alpha) is below 1e-18 beyond this frequency.
double cf_cutoff(double alpha) { return std::pow(42.0, 1.0 / alpha); }

// Adaptive Gauss-Kronrod over panels no wider than a quarter of the cosine
// period; the integrand has no long-range structure the panels could miss.
double fourier_cos_integral(double alpha, double x) {
  using boost::math::quadrature::gauss_kronrod;
  using boost::math::quadrature::tanh_sinh;
  const double ax = std::abs(x);
  const double upper = cf_cutoff(alpha);
  const double panel = ax > 0.0 ? std::min(1.0, 0.5 * kPi / ax) : 1.0;
  auto f = [alpha, ax](double xi) { return std::cos(ax * xi) * std::exp(-std::pow(xi, alpha)); };
  // The first panel carries the xi^alpha kink at the origin; tanh-sinh
  // clusters nodes at the endpoints and handles it without deep bisection.
  static thread_local tanh_sinh<double> ts;
  double total = ts.integrate(f, 0.0, std::min(upper, panel));
  for (double lo = panel; lo < upper; lo += panel) {
    const double hi = std::min(upper, lo + panel);
    total += gauss_kronrod<double, 31>::integrate(f, lo, hi, 4, 1e-13);
  }
  return total;
}

}  // namespace

StableParams::StableParams(double alpha, int dim) : alpha_(alpha), dim_(dim) {
  if (!(alpha > 1.0 && alpha < 2.0)) {
    throw InvalidArgument("stability index must lie in (1, 2), got " + std::to_string(alpha));
  }
  if (dim < 1) {
    throw InvalidArgument("dimension must be >= 1, got " + std::to_string(dim));
  }
}

double draw_standard_stable(double alpha, RngStream& stream) {
  const double v = kPi * (stream.uniform() - 0.5);
  const double w = stream.exponential();
  const double av = alpha * v;
  return std::sin(av) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - av) / w, (1.0 - alpha) / alpha);
}

double draw_positive_stable(double gamma, RngStream& stream) {
  const double u = kPi * stream.uniform();
  const double w = stream.exponential();
  return std::sin(gamma * u) / std::pow(std::sin(u), 1.0 / gamma) *
         std::pow(std::sin((1.0 - gamma) * u) / w, (1.0 - gamma) / gamma);
}

void draw_stable(const StableParams& params, RngStream& stream, std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(params.dim())) {
    throw InvalidArgument("output span does not match the stable dimension");
  }
  if (params.dim() == 1) {
    out[0] = draw_standard_stable(params.alpha(), stream);
    return;
  }
  const double radial = std::sqrt(draw_positive_stable(0.5 * params.alpha(), stream));
  for (double& c : out) c = radial * std::numbers::sqrt2 * stream.normal();
}

std::vector<double> sample_stable(const StableParams& params, std::size_t count,
                                  RngStream& stream) {
  if (count == 0) throw InvalidArgument("sample_stable: count must be positive");
  const auto d = static_cast<std::size_t>(params.dim());
  std::vector<double> out(count * d);
  for (std::size_t i = 0; i < count; ++i) {
    draw_stable(params, stream, std::span<double>(out).subspan(i * d, d));
  }
  return out;
}

double increment_scale(double alpha, double dt) { return std::pow(dt, 1.0 / alpha); }

LevyIncrement levy_increment(const StableParams& params, double dt, RngStream& stream) {
  if (!(dt > 0.0)) throw InvalidArgument("levy_increment: dt must be positive");
  LevyIncrement inc{dt, std::vector<double>(static_cast<std::size_t>(params.dim()))};
  draw_stable(params, stream, inc.value);
  const double scale = increment_scale(params.alpha(), dt);
  for (double& c : inc.value) c *= scale;
  return inc;
}

double stable_density(double alpha, double x) {
  return fourier_cos_integral(alpha, x) / kPi;
}

std::vector<double> stable_density_oracle(const StableParams& params,
                                          std::span<const double> x) {
  if (params.dim() != 1) {
    throw InvalidArgument("stable_density_oracle supports dimension 1 only");
  }
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(),
                 [&](double xi) { return stable_density(params.alpha(), xi); });
  return out;
}

double unit_sphere_area(int n) {
  const double half = 0.5 * n;
  return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

double levy_measure_constant(const StableParams& params) {
  using boost::math::quadrature::tanh_sinh;
  const double alpha = params.alpha();
  const int n = params.dim();

  // Radial factor I = int_0^inf (1 - cos r) r^(-1-alpha) dr, split at r = 1.
  tanh_sinh<double> ts;
  const double near = ts.integrate(
      [alpha](double r) {
        // 1 - cos r without cancellation; (s / r)^2 keeps r -> 0 finite.
        if (r <= 0.0) return 0.0;
        const double s = std::sin(0.5 * r) / r;
        return 2.0 * s * s * std::pow(r, 1.0 - alpha);
      },
      0.0, 1.0);
  // int_1^inf cos(r) r^(-1-alpha) dr over panels of one period, plus the
  // alternating tail estimated by the last panel (it is O(R^(-1-alpha))).
  using boost::math::quadrature::gauss_kronrod;
  auto osc = [alpha](double r) { return std::cos(r) * std::pow(r, -1.0 - alpha); };
  double far_cos = 0.0;
  const double period = 2.0 * kPi;
  double lo = 1.0;
  const double upper = 1.0 + 4000.0 * period;
  for (; lo < upper; lo += period) {
    far_cos += gauss_kronrod<double, 31>::integrate(osc, lo, lo + period, 8, 1e-15);
  }
  // Remaining tail by one integration by parts: int_R^inf cos r r^-p ~ -sin(R) R^-p.
  far_cos += -std::sin(lo) * std::pow(lo, -1.0 - alpha);
  const double radial = near + 1.0 / alpha - far_cos;

  // Angular factor int_{S^{n-1}} |theta_1|^alpha dtheta.
  double angular = 2.0;
  if (n >= 2) {
    const double ring = unit_sphere_area(n - 1);
    angular = ring * gauss_kronrod<double, 61>::integrate(
                         [alpha, n](double phi) {
                           return std::pow(std::abs(std::cos(phi)), alpha) *
                                  std::pow(std::sin(phi), n - 2);
                         },
                         0.0, kPi, 15, 1e-14);
  }
  return 1.0 / (radial * angular);
}

LevyMoments levy_moments(const StableParams& params) {
  const double c = levy_measure_constant(params);
  const double alpha = params.alpha();
  const double area = unit_sphere_area(params.dim());
  return {c, c * area / (2.0 - alpha), c * area / (alpha - 1.0)};
}

}  // namespace levyfdt
