#include "levyfdt/nonlocal.hpp"

#include <cmath>
#include <sstream>

#include "levyfdt/errors.hpp"
#include "levyfdt/log.hpp"
#include "spectral.hpp"

namespace levyfdt {

using detail::Complex;
using detail::FourierPlan;

double high_frequency_fraction(const GridField& f) {
  const std::size_t n = f.size();
  const auto plan = FourierPlan::get(n);
  std::vector<Complex> spec(plan->spectrum_size());
  plan->forward(f.values(), spec);
  const auto cutoff = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(n / 2)));
  double total = 0.0, high = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    // Interior bins stand for two conjugate frequencies.
    const double w = (k == 0 || k == n / 2) ? 1.0 : 2.0;
    const double e = w * std::norm(spec[k]);
    total += e;
    if (k >= cutoff) high += e;
  }
  return total > 0.0 ? high / total : 0.0;
}

GridField fractional_laplacian(const GridField& f, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("fractional order must be positive");
  const auto plan = FourierPlan::get(f.size());
  const auto mult = detail::fractional_multiplier(f.grid(), alpha);
  GridField out(f.grid(), f.kind());
  detail::apply_multiplier(*plan, std::span<const double>(mult), f.values(), out.values());
  return out;
}

GridField spectral_derivative(const GridField& f) {
  const auto plan = FourierPlan::get(f.size());
  const auto mult = detail::derivative_multiplier(f.grid());
  GridField out(f.grid(), FieldKind::generic);
  detail::apply_multiplier(*plan, std::span<const Complex>(mult), f.values(), out.values());
  return out;
}

GridCoefficients GridCoefficients::sample(const SdeModel& model, const Grid1D& grid) {
  if (model.dim() != 1 || !model.is_scalar()) {
    throw InvalidArgument("grid operators need a one-dimensional model");
  }
  GridCoefficients c;
  const double a = model.alpha();
  c.drift = GridField::sample(grid, [&](double x) { return model.drift_1d(x); }).values();
  c.jump_weight = GridField::sample(grid, [&](double x) {
                    return std::pow(std::abs(model.diffusion_1d(x)), a);
                  }).values();
  for (double v : c.jump_weight) {
    if (v != c.jump_weight[0]) {
      c.constant_sigma = false;
      break;
    }
  }
  return c;
}

void apply_generator(const Grid1D& grid, const GridCoefficients& c, double alpha,
                     std::span<const double> u, std::span<double> out) {
  const std::size_t n = grid.size();
  const auto plan = FourierPlan::get(n);
  const auto dm = detail::derivative_multiplier(grid);
  const auto fm = detail::fractional_multiplier(grid, alpha);
  std::vector<double> du(n), fu(n);
  detail::apply_multiplier(*plan, std::span<const Complex>(dm), u, du);
  detail::apply_multiplier(*plan, std::span<const double>(fm), u, fu);
  for (std::size_t i = 0; i < n; ++i) out[i] = c.drift[i] * du[i] - c.jump_weight[i] * fu[i];
}

void apply_adjoint(const Grid1D& grid, const GridCoefficients& c, double alpha,
                   std::span<const double> phi, std::span<double> out) {
  const std::size_t n = grid.size();
  const auto plan = FourierPlan::get(n);
  const auto dm = detail::derivative_multiplier(grid);
  const auto fm = detail::fractional_multiplier(grid, alpha);
  std::vector<double> bp(n), sp(n), d(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    bp[i] = c.drift[i] * phi[i];
    sp[i] = c.jump_weight[i] * phi[i];
  }
  detail::apply_multiplier(*plan, std::span<const Complex>(dm), bp, d);
  detail::apply_multiplier(*plan, std::span<const double>(fm), sp, f);
  for (std::size_t i = 0; i < n; ++i) out[i] = -d[i] - f[i];
}

namespace {

void check_aliasing(const GridField& f, const char* what, OperatorDiagnostics* diag) {
  const double frac = high_frequency_fraction(f);
  if (diag != nullptr) diag->high_frequency_fraction = frac;
  if (frac <= kAliasingThreshold) return;
  std::ostringstream msg;
  msg << what << ": input carries " << frac
      << " of its spectral energy in the top 10% of frequencies; refine the grid";
  if (diag != nullptr) {
    diag->warnings.push_back(msg.str());
  } else {
    warn(msg.str());
  }
}

}  // namespace

GridField apply_generator(const SdeModel& model, const GridField& u, OperatorDiagnostics* diag) {
  check_aliasing(u, "apply_generator", diag);
  const auto c = GridCoefficients::sample(model, u.grid());
  GridField out(u.grid(), FieldKind::generic);
  apply_generator(u.grid(), c, model.alpha(), u.values(), out.values());
  return out;
}

GridField apply_adjoint(const SdeModel& model, const GridField& phi, OperatorDiagnostics* diag) {
  check_aliasing(phi, "apply_adjoint", diag);
  const auto c = GridCoefficients::sample(model, phi.grid());
  GridField out(phi.grid(), FieldKind::generic);
  apply_adjoint(phi.grid(), c, model.alpha(), phi.values(), out.values());
  return out;
}

}  // namespace levyfdt
