#include "levyfdt/fokker_planck.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "levyfdt/nonlocal.hpp"
#include "spectral.hpp"

namespace levyfdt {

using detail::Complex;
using detail::FourierPlan;

const char* to_string(FpMethod m) {
  return m == FpMethod::exponential_splitting ? "exponential-splitting" : "explicit-RK";
}

FpMethod parse_fp_method(const std::string& s) {
  if (s == "exponential-splitting") return FpMethod::exponential_splitting;
  if (s == "explicit-RK" || s == "explicit-rk") return FpMethod::explicit_rk;
  throw InvalidArgument("unknown solver method '" + s +
                        "' (expected exponential-splitting or explicit-RK)");
}

void FpSolveSpec::validate() const {
  if (!(dt > 0.0)) throw InvalidArgument("solver dt must be positive");
  if (!(stop_tol > 0.0)) throw InvalidArgument("solver stop_tol must be positive");
  if (!(t_end >= 0.0)) throw InvalidArgument("solver t_end must be non-negative");
  if (!(stability_number > 0.0)) throw InvalidArgument("solver stability number must be positive");
  if (!(check_interval > 0.0)) throw InvalidArgument("solver check interval must be positive");
}

// ---------------------------------------------------------------------------
// Propagator

struct Propagator::Impl {
  Grid1D grid;
  std::size_t n;
  std::size_t m;
  std::shared_ptr<const FourierPlan> plan;
  GridCoefficients coef;
  double alpha;
  const Perturbation* pert = nullptr;
  double eps = 0.0;
  std::vector<double> kfield;
  FpMethod method;
  std::size_t sub = 1;
  double h = 0.0;

  std::vector<Complex> dm;
  std::vector<double> fm;
  // Exponential RK4 coefficients (Cox-Matthews, contour-averaged).
  std::vector<double> E, E2, Q, f1, f2, f3;

  Impl(const SdeModel& model, const Grid1D& g, const FpSolveSpec& spec, std::optional<Drive> drive)
      : grid(g), n(g.size()), m(g.size() / 2 + 1), plan(FourierPlan::get(g.size())),
        coef(GridCoefficients::sample(model, g)), alpha(model.alpha()), method(spec.method) {
    spec.validate();
    if (drive && drive->perturbation != nullptr && drive->epsilon != 0.0) {
      pert = drive->perturbation;
      eps = drive->epsilon;
      kfield = GridField::sample(g, [&](double x) { return pert->space_field_1d(x); }).values();
    }
    if (!coef.constant_sigma) method = FpMethod::explicit_rk;
    dm = detail::derivative_multiplier(g);
    fm = detail::fractional_multiplier(g, alpha);

    double bmax = 0.0;
    for (double b : coef.drift) bmax = std::max(bmax, std::abs(b));
    if (pert != nullptr) {
      double fsup = 0.0;
      const double horizon = std::max(spec.t_end, spec.dt);
      for (int i = 0; i <= 2000; ++i) {
        fsup = std::max(fsup, std::abs(pert->time_profile(horizon * i / 2000.0)));
      }
      double ksup = 0.0;
      for (double k : kfield) ksup = std::max(ksup, std::abs(k));
      bmax += std::abs(eps) * fsup * ksup;
    }
    const double xi = g.max_frequency();
    double smax = 0.0;
    for (double s : coef.jump_weight) smax = std::max(smax, s);
    double rho = bmax * xi;
    if (method == FpMethod::explicit_rk) rho += smax * std::pow(xi, alpha);
    sub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(spec.dt * rho / spec.stability_number)));
    h = spec.dt / static_cast<double>(sub);

    if (method == FpMethod::exponential_splitting) build_etd(coef.jump_weight[0]);
  }

  void build_etd(double s) {
    constexpr int kContour = 32;
    E.resize(m);
    E2.resize(m);
    Q.resize(m);
    f1.resize(m);
    f2.resize(m);
    f3.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double lam = -s * fm[k];
      const double z = h * lam;
      E[k] = std::exp(z);
      E2[k] = std::exp(0.5 * z);
      Complex q = 0.0, a = 0.0, b = 0.0, c = 0.0;
      for (int j = 0; j < kContour; ++j) {
        const Complex r = std::exp(Complex(0.0, std::numbers::pi * (j + 0.5) / kContour));
        const Complex lr = z + r;
        const Complex e = std::exp(lr);
        const Complex lr2 = lr * lr, lr3 = lr2 * lr;
        q += (std::exp(0.5 * lr) - 1.0) / lr;
        a += (-4.0 - lr + e * (4.0 - 3.0 * lr + lr2)) / lr3;
        b += (2.0 + lr + e * (-2.0 + lr)) / lr3;
        c += (-4.0 - 3.0 * lr - lr2 + e * (4.0 - lr)) / lr3;
      }
      Q[k] = h * (q / double(kContour)).real();
      f1[k] = h * (a / double(kContour)).real();
      f2[k] = h * (b / double(kContour)).real();
      f3[k] = h * (c / double(kContour)).real();
    }
  }

  double forcing(double t) const { return pert != nullptr ? eps * pert->time_profile(t) : 0.0; }

  // Spectral -( (b + eps F(t) K) p )' from the spectrum of p.
  void drift_term(std::span<const Complex> v, double t, std::span<Complex> out,
                  std::vector<Complex>& work, std::vector<double>& real) const {
    std::copy(v.begin(), v.end(), work.begin());
    plan->inverse(work, real);
    const double f = forcing(t);
    if (f != 0.0) {
      for (std::size_t i = 0; i < n; ++i) real[i] *= coef.drift[i] + f * kfield[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) real[i] *= coef.drift[i];
    }
    plan->forward(real, out);
    for (std::size_t k = 0; k < m; ++k) out[k] *= -dm[k];
  }

  void etd_step(std::vector<double>& p, double t0) const {
    std::vector<Complex> v(m), a(m), b(m), c(m), nv(m), na(m), nb(m), nc(m), work(m);
    std::vector<double> real(n);
    plan->forward(p, v);
    double t = t0;
    for (std::size_t s = 0; s < sub; ++s) {
      drift_term(v, t, nv, work, real);
      for (std::size_t k = 0; k < m; ++k) a[k] = E2[k] * v[k] + Q[k] * nv[k];
      drift_term(a, t + 0.5 * h, na, work, real);
      for (std::size_t k = 0; k < m; ++k) b[k] = E2[k] * v[k] + Q[k] * na[k];
      drift_term(b, t + 0.5 * h, nb, work, real);
      for (std::size_t k = 0; k < m; ++k) c[k] = E2[k] * a[k] + Q[k] * (2.0 * nb[k] - nv[k]);
      drift_term(c, t + h, nc, work, real);
      for (std::size_t k = 0; k < m; ++k) {
        v[k] = E[k] * v[k] + nv[k] * f1[k] + 2.0 * (na[k] + nb[k]) * f2[k] + nc[k] * f3[k];
      }
      t += h;
    }
    plan->inverse(v, p);
  }

  void rhs(std::span<const double> p, double t, std::span<double> out, std::vector<double>& bp,
           std::vector<double>& sp, std::vector<double>& d) const {
    const double f = forcing(t);
    for (std::size_t i = 0; i < n; ++i) {
      const double b = f != 0.0 ? coef.drift[i] + f * kfield[i] : coef.drift[i];
      bp[i] = b * p[i];
      sp[i] = coef.jump_weight[i] * p[i];
    }
    detail::apply_multiplier(*plan, std::span<const Complex>(dm), bp, d);
    detail::apply_multiplier(*plan, std::span<const double>(fm), sp, out);
    for (std::size_t i = 0; i < n; ++i) out[i] = -d[i] - out[i];
  }

  void rk_step(std::vector<double>& p, double t0) const {
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), bp(n), sp(n), d(n);
    double t = t0;
    for (std::size_t s = 0; s < sub; ++s) {
      rhs(p, t, k1, bp, sp, d);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
      rhs(tmp, t + 0.5 * h, k2, bp, sp, d);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
      rhs(tmp, t + 0.5 * h, k3, bp, sp, d);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + h * k3[i];
      rhs(tmp, t + h, k4, bp, sp, d);
      for (std::size_t i = 0; i < n; ++i) p[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
      t += h;
    }
  }
};

Propagator::Propagator(const SdeModel& model, const Grid1D& grid, const FpSolveSpec& spec,
                       std::optional<Drive> drive)
    : impl_(std::make_unique<Impl>(model, grid, spec, drive)) {}
Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

void Propagator::step(std::vector<double>& p, double t) const {
  if (p.size() != impl_->n) throw InvalidArgument("propagator: field length mismatch");
  if (impl_->method == FpMethod::exponential_splitting) {
    impl_->etd_step(p, t);
  } else {
    impl_->rk_step(p, t);
  }
}

std::size_t Propagator::substeps() const { return impl_->sub; }
FpMethod Propagator::method() const { return impl_->method; }

// ---------------------------------------------------------------------------
// Evolution

namespace {

double riemann_mass(const std::vector<double>& v, double h) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * h;
}

double l1(const std::vector<double>& v, double h) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s * h;
}

Evolution evolve_impl(const SdeModel& model, const GridField& f0, const FpSolveSpec& spec,
                      std::optional<Drive> drive, double snapshot_every, bool density) {
  spec.validate();
  const Grid1D& grid = f0.grid();
  const double h = grid.spacing();
  const Propagator prop(model, grid, spec, drive);
  const auto steps = static_cast<std::size_t>(std::llround(spec.t_end / spec.dt));
  std::size_t stride = steps;
  if (snapshot_every > 0.0) {
    stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(snapshot_every / spec.dt)));
  }

  Evolution ev;
  ev.method_used = prop.method();
  ev.substeps = prop.substeps();
  std::vector<double> p = f0.values();
  const double scale = std::max(l1(p, h), std::numeric_limits<double>::min());

  auto record = [&](double t) {
    GridField snap(grid, p, density ? FieldKind::density : f0.kind());
    if (density) {
      const double lo = snap.min();
      ev.clamp_min = std::min(ev.clamp_min, lo);
      if (lo < 0.0) {
        for (double& v : snap.values()) {
          if (v < 0.0) {
            v = 0.0;
            ++ev.clamped_points;
          }
        }
        snap.normalize();
      }
    }
    ev.times.push_back(t);
    ev.snapshots.push_back(std::move(snap));
  };

  record(0.0);
  double mass = riemann_mass(p, h);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    prop.step(p, t);
    const double next = riemann_mass(p, h);
    const double change = std::abs(next - mass) / scale;
    if (!std::isfinite(next) || change > 1e-6 * spec.dt) {
      std::ostringstream msg;
      msg << "evolution unstable at step " << k + 1 << " (t = " << t + spec.dt
          << "): relative mass change " << change << " exceeds 1e-6 per unit time";
      throw NumericalError(msg.str());
    }
    ev.max_step_mass_change = std::max(ev.max_step_mass_change, change);
    mass = next;
    if ((k + 1) % stride == 0 || k + 1 == steps) record(static_cast<double>(k + 1) * spec.dt);
  }
  return ev;
}

}  // namespace

Evolution evolve_density(const SdeModel& model, const GridField& p0, const FpSolveSpec& spec,
                         std::optional<Drive> drive, double snapshot_every) {
  p0.check_density();
  if (std::abs(p0.mass() - 1.0) > 1e-8) throw InvalidArgument("evolve_density: p0 must have unit mass");
  return evolve_impl(model, p0, spec, drive, snapshot_every, true);
}

Evolution evolve_signed(const SdeModel& model, const GridField& g0, const FpSolveSpec& spec,
                        double snapshot_every) {
  return evolve_impl(model, g0, spec, std::nullopt, snapshot_every, false);
}

double stationary_residual(const SdeModel& model, const GridField& p) {
  const auto c = GridCoefficients::sample(model, p.grid());
  std::vector<double> out(p.size());
  apply_adjoint(p.grid(), c, model.alpha(), p.values(), out);
  const double h = p.grid().spacing();
  return l1(out, h) / l1(p.values(), h);
}

double boundary_mass(const GridField& p) {
  const double cut = kBoundaryBand * p.grid().half_width();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p.grid().x(i)) >= cut) s += p[i];
  }
  return s * p.grid().spacing();
}

// ---------------------------------------------------------------------------
// Bordered dense system

struct AdjointSystem::Impl {
  Grid1D grid;
  GridCoefficients coef;
  double alpha;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  double rcond = 0.0;

  Impl(const SdeModel& model, const Grid1D& g)
      : grid(g), coef(GridCoefficients::sample(model, g)), alpha(model.alpha()) {
    const std::size_t n = g.size();
    const auto plan = FourierPlan::get(n);
    std::vector<double> e0(n, 0.0), d0(n), f0(n);
    e0[0] = 1.0;
    const auto dm = detail::derivative_multiplier(g);
    const auto fm = detail::fractional_multiplier(g, alpha);
    detail::apply_multiplier(*plan, std::span<const Complex>(dm), e0, d0);
    detail::apply_multiplier(*plan, std::span<const double>(fm), e0, f0);
    // Both stencils are circulant: column j is the e0 response shifted by j.
    Eigen::MatrixXd M(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      const double b = coef.drift[j];
      const double s = coef.jump_weight[j];
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = (i + n - j) % n;
        M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = -b * d0[r] - s * f0[r];
      }
    }
    M.row(0).setConstant(g.spacing());
    lu.compute(M);
    rcond = lu.rcond();
  }
};

AdjointSystem::AdjointSystem(const SdeModel& model, const Grid1D& grid)
    : impl_(std::make_shared<const Impl>(model, grid)) {
  if (!(impl_->rcond > kSingularRcond)) {
    std::ostringstream msg;
    msg << "bordered adjoint system is singular (rcond " << impl_->rcond
        << "): the discrete null space is not one-dimensional";
    throw NumericalError(msg.str());
  }
}

const Grid1D& AdjointSystem::grid() const { return impl_->grid; }
double AdjointSystem::rcond() const { return impl_->rcond; }

std::vector<double> AdjointSystem::solve(std::span<const double> rhs, double mass) const {
  const std::size_t n = impl_->grid.size();
  if (rhs.size() != n) throw InvalidArgument("adjoint solve: rhs length mismatch");
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) b(static_cast<Eigen::Index>(i)) = rhs[i];
  b(0) = mass;
  const Eigen::VectorXd x = impl_->lu.solve(b);
  return {x.data(), x.data() + n};
}

std::vector<double> AdjointSystem::apply(std::span<const double> x) const {
  std::vector<double> out(x.size());
  apply_adjoint(impl_->grid, impl_->coef, impl_->alpha, x, out);
  return out;
}

// ---------------------------------------------------------------------------
// Stationary density

StationaryResult solve_stationary(const SdeModel& model, const Grid1D& grid, const FpSolveSpec& spec) {
  spec.validate();
  SolveLog log;
  log.method = to_string(spec.method);
  log.boundary_mass_limit = spec.boundary_mass_limit;
  const double L = grid.half_width();
  const double sd = 0.25 * L;
  GridField p = GridField::sample(grid, [sd](double x) { return std::exp(-0.5 * x * x / (sd * sd)); },
                                  FieldKind::density);
  p.normalize();

  FpSolveSpec warm = spec;
  warm.t_end = spec.warm_time;
  const Propagator prop(model, grid, warm);
  log.method = to_string(prop.method());
  const auto per_check =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.check_interval / spec.dt)));
  double t = 0.0;
  double res = stationary_residual(model, p);
  log.residual_times.push_back(0.0);
  log.residual_history.push_back(res);
  while (t + 0.5 * spec.dt < spec.warm_time && res > spec.stop_tol) {
    for (std::size_t k = 0; k < per_check; ++k) {
      prop.step(p.values(), t);
      t += spec.dt;
    }
    if (!std::isfinite(p.mass())) throw SolveFailure("stationary warm-up diverged", log);
    const double next = stationary_residual(model, p);
    log.residual_times.push_back(t);
    log.residual_history.push_back(next);
    const bool stalled = next > 0.9 * res;
    res = next;
    if (stalled) break;
  }
  log.warm_time = t;

  const AdjointSystem sys(model, grid);
  log.rcond = sys.rcond();
  std::vector<double> r = sys.apply(p.values());
  for (double& v : r) v = -v;
  const auto delta = sys.solve(r, 1.0 - p.mass());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += delta[i];

  log.clamp_min = p.min();
  if (log.clamp_min < 0.0) {
    for (double& v : p.values()) {
      if (v < 0.0) {
        v = 0.0;
        ++log.clamped_points;
      }
    }
  }
  p.normalize();
  log.final_residual = stationary_residual(model, p);
  log.residual_times.push_back(t);
  log.residual_history.push_back(log.final_residual);

  log.boundary_mass = boundary_mass(p);
  log.confining = model.drift_1d(kBoundaryBand * L) < 0.0 && model.drift_1d(-kBoundaryBand * L) > 0.0;
  if (log.boundary_mass > spec.boundary_mass_limit) {
    std::ostringstream msg;
    msg << "boundary mass " << log.boundary_mass << " on |x| >= " << kBoundaryBand * L << " exceeds "
        << spec.boundary_mass_limit;
    if (log.confining) {
      throw SolveFailure(msg.str() + "; enlarge the grid half width", log);
    }
    log.warnings.push_back(msg.str() + " (drift is not confining; periodic answer kept)");
  }
  if (!(log.final_residual <= spec.stop_tol)) {
    std::ostringstream msg;
    msg << "stationary residual " << log.final_residual << " above stop_tol " << spec.stop_tol;
    throw SolveFailure(msg.str(), log);
  }
  return {std::move(p), std::move(log)};
}

// ---------------------------------------------------------------------------
// Conjugate variable and Agarwal observable

GridField perturbation_adjoint(const Perturbation& perturbation, const GridField& p) {
  const auto k = GridField::sample(p.grid(), [&](double x) { return perturbation.space_field_1d(x); });
  GridField kp(p.grid(), FieldKind::generic);
  for (std::size_t i = 0; i < p.size(); ++i) kp[i] = k[i] * p[i];
  GridField out = spectral_derivative(kp);
  for (double& v : out.values()) v = -v;
  return out;
}

GridField gauge_mass_zero(const GridField& v, const GridField& p_ss) {
  const double c = v.mass() / p_ss.mass();
  GridField out(v.grid(), v.kind());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - c * p_ss[i];
  return out;
}

FloorInfo positivity_floor(const GridField& p_ss) {
  FloorInfo info;
  info.floor = kPositivityFloor * p_ss.max();
  info.floored.assign(p_ss.size(), false);
  double share = 0.0;
  for (std::size_t i = 0; i < p_ss.size(); ++i) {
    if (p_ss[i] < info.floor) {
      info.floored[i] = true;
      ++info.count;
      share += std::max(p_ss[i], 0.0);
    }
  }
  info.mass_share = share * p_ss.grid().spacing();
  return info;
}

ConjugateSolution solve_conjugate(const AdjointSystem& system, const GridField& p_ss,
                                  const Perturbation& perturbation, double residual_tol) {
  if (!(p_ss.grid() == system.grid())) throw InvalidArgument("solve_conjugate: grid mismatch");
  const GridField g = perturbation_adjoint(perturbation, p_ss);
  const double compat = g.mass();
  if (std::abs(compat) > kCompatibilityTol) {
    std::ostringstream msg;
    msg << "solve_conjugate: mass of L* p_ss is " << compat << ", not zero; K and p_ss are inconsistent";
    throw InvalidArgument(msg.str());
  }
  const auto raw = system.solve(g.values(), 0.0);
  GridField v = gauge_mass_zero(GridField(p_ss.grid(), raw, FieldKind::generic), p_ss);

  const auto av = system.apply(v.values());
  const double h = p_ss.grid().spacing();
  double abs_res = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) abs_res += std::abs(av[i] - g[i]);
  abs_res *= h;
  const double gnorm = g.l1_norm();

  ConjugateSolution sol{v, GridField(p_ss.grid(), FieldKind::observable), 0.0, abs_res, compat,
                        positivity_floor(p_ss), "mass-zero"};
  sol.residual = gnorm > 0.0 ? abs_res / gnorm : abs_res;
  if (sol.residual > residual_tol) {
    std::ostringstream msg;
    msg << "solve_conjugate: relative residual " << sol.residual << " above " << residual_tol;
    throw NumericalError(msg.str());
  }
  for (std::size_t i = 0; i < v.size(); ++i) sol.U[i] = v[i] / std::max(p_ss[i], sol.floor.floor);
  return sol;
}

ConjugateSolution solve_conjugate(const SdeModel& model, const GridField& p_ss,
                                  const Perturbation& perturbation, double residual_tol) {
  const AdjointSystem sys(model, p_ss.grid());
  return solve_conjugate(sys, p_ss, perturbation, residual_tol);
}

AgarwalObservable agarwal_observable(const GridField& p_ss, const Perturbation& perturbation) {
  const GridField g = perturbation_adjoint(perturbation, p_ss);
  AgarwalObservable out{GridField(p_ss.grid(), FieldKind::observable), positivity_floor(p_ss), 0.0, 0.0};
  if (out.floor.mass_share > kMaxFlooredShare) {
    std::ostringstream msg;
    msg << "agarwal_observable: " << 100.0 * out.floor.mass_share
        << "% of the stationary mass sits on floored cells (limit 5%)";
    throw NumericalError(msg.str());
  }
  const double h = p_ss.grid().spacing();
  double check = 0.0, bias = 0.0;
  for (std::size_t i = 0; i < p_ss.size(); ++i) {
    const double y = g[i] / std::max(p_ss[i], out.floor.floor);
    out.Y[i] = y;
    if (out.floor.floored[i]) {
      check += g[i];
      bias += y * p_ss[i] - g[i];
    } else {
      check += y * p_ss[i];
    }
  }
  out.construction_check = check * h;
  out.floor_bias = bias * h;
  if (std::abs(out.construction_check) > 1e-8 * std::max(1.0, g.l1_norm())) {
    std::ostringstream msg;
    msg << "agarwal_observable: Y has stationary mean " << out.construction_check << ", not zero";
    throw NumericalError(msg.str());
  }
  return out;
}

}  // namespace levyfdt
