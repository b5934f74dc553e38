// Acceptance run: one PASS/FAIL line per criterion.
//
//   levyfdt_acceptance            all criteria
//   levyfdt_acceptance 1 3 7      a subset
//
// Exit status is 0 when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "levyfdt/errors.hpp"
#include "levyfdt/fokker_planck.hpp"
#include "levyfdt/grid.hpp"
#include "levyfdt/model.hpp"
#include "levyfdt/nonlocal.hpp"
#include "levyfdt/response.hpp"
#include "levyfdt/rng.hpp"
#include "levyfdt/simulate.hpp"
#include "levyfdt/stable.hpp"

using namespace levyfdt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome stable_cf() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 1000000;
  double worst = 0.0;
  RngStream stream(101);
  for (double alpha : {1.2, 1.5, 1.8}) {
    const auto s = sample_stable(StableParams(alpha), n, stream);
    for (double xi : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      std::complex<double> acc = 0.0;
      for (double v : s) acc += std::polar(1.0, xi * v);
      acc /= static_cast<double>(n);
      worst = std::max(worst, std::abs(acc - std::exp(-std::pow(xi, alpha))));
    }
  }
  const double secs = elapsed(t0);
  return {worst < 5e-3 && secs < 10.0,
          "max |cf error| " + fmt("%.2e", worst) + " (< 5e-3), " + fmt("%.1f", secs) + " s (< 10 s)"};
}

Outcome stationary_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid1D grid(32.0, 2048);
  const auto st = solve_stationary(models::stable_ou(1.0, 1.0, 1.5), grid);
  // Stationary law: standard stable scaled by (1 / 1.5)^(1/1.5).
  const double scale = std::pow(1.0 / 1.5, 1.0 / 1.5);
  std::vector<double> x = grid.points();
  for (double& v : x) v /= scale;
  auto q = stable_density_oracle(StableParams(1.5), x);
  for (double& v : q) v /= scale;
  const double l1 = l1_distance(st.density, GridField(grid, std::move(q), FieldKind::density));
  const double secs = elapsed(t0);
  return {l1 < 1e-2 && secs < 60.0,
          "L1 " + fmt("%.3e", l1) + " (< 1e-2), " + fmt("%.1f", secs) + " s (< 60 s)"};
}

Outcome mc_pde_density() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = models::tanh_well(2.0, 1.0, 1.5);
  const Grid1D grid(32.0, 2048);
  const auto st = solve_stationary(model, grid);

  SteadyStateSpec spec;
  spec.n_samples = 1000000;
  spec.n_chains = 5000;
  spec.thinning = 0.5;
  spec.domain = Domain::periodic;
  spec.half_width = grid.half_width();
  const auto s = sample_steady_state(model, spec, 303);

  // Bins of width 0.5 over the whole periodic cell; PDE bin mass by the
  // trapezoid rule between grid points (bin edges are grid points).
  const double h = 0.5, L = grid.half_width();
  const auto nb = static_cast<std::size_t>(std::lround(2.0 * L / h));
  std::vector<double> count(nb, 0.0);
  for (double v : s.states) count[std::min(nb - 1, static_cast<std::size_t>((v + L) / h))] += 1.0;
  const std::size_t per_bin = grid.size() / nb;
  const double dx = grid.spacing();
  double l1 = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    double m = 0.0;
    for (std::size_t j = 0; j < per_bin; ++j) {
      const std::size_t i = b * per_bin + j;
      m += 0.5 * dx * (st.density[i] + st.density[(i + 1) % grid.size()]);
    }
    l1 += std::abs(count[b] / static_cast<double>(s.states.size()) - m);
  }
  const double secs = elapsed(t0);
  return {l1 < 2.5e-2 && secs < 300.0,
          "L1 " + fmt("%.3e", l1) + " (< 2.5e-2), " + fmt("%.1f", secs) + " s (< 300 s)"};
}

Outcome flagship() {
  VerifyConfig cfg;  // tanh-well, O = tanh, K = 1/(1+x^2), eps {0.1, 0.05}, 2e5 paths
  const auto rep = verify_fdt(cfg);
  if (rep.failure) return {false, "verification error: " + *rep.failure};
  std::ostringstream os;
  for (const auto& c : rep.checks) {
    os << c.a << "-" << c.b << " " << fmt("%.4f", c.sup_diff) << "/" << fmt("%.4f", c.tol)
       << (c.pass ? "" : " FAIL") << "; ";
  }
  os << fmt("%.0f", rep.runtime_seconds) << " s";
  return {rep.pass, os.str()};
}

Outcome epsilon_order() {
  const auto model = models::tanh_well();
  ResponseSpec spec;
  spec.t_grid = {0.1, 3.0};
  const std::vector<double> eps{0.1, 0.05, 0.025};
  const auto r = response_direct(model, perturbations::inverse_quadratic(), observables::tanh_x(), eps,
                                 20000, spec, 505, 3.0);
  const auto& med = r.linearity.median_order;
  if (med.empty()) return {false, "no remainder pair"};
  const double order = *std::min_element(med.begin(), med.end());
  return {order >= 1.5, "median epsilon order " + fmt("%.3f", order) + " (>= 1.5)"};
}

Outcome moment_slope() {
  IntegratorSpec spec;
  spec.dt = 1e-3;
  spec.t_max = 50.0;
  spec.save_stride = 500;
  const auto res = run_ensemble(models::tanh_well(), InitialLaw::fixed({0.0}), spec, std::nullopt,
                                {observables::moment()}, 10000, 606);
  std::vector<double> w(res.times.size(), 0.0);
  std::vector<double> second;
  std::size_t first = 0;
  while (res.times[first] < 25.0 - 1e-9) ++first;
  for (std::size_t i = first; i < res.times.size(); ++i) second.push_back(res.times[i]);
  const auto sw = slope_weights(second);
  std::copy(sw.begin(), sw.end(), w.begin() + static_cast<std::ptrdiff_t>(first));
  const auto [slope, se] = linear_functional(res, 0, w);
  return {slope < 2.0 * se, "slope " + fmt("%.3e", slope) + ", 2 se " + fmt("%.3e", 2.0 * se) +
                                ", E sqrt(1+X^2) at t=50 " + fmt("%.3f", res.observable_mean[0].back())};
}

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

Outcome structural() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid1D g(32.0, 2048);
  const auto model = models::tanh_well();
  std::vector<std::string> failed;
  std::ostringstream os;

  RngStream s(707);
  double duality = 0.0, mass = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto u = random_smooth(g, s);
    const auto phi = random_smooth(g, s);
    const double lhs = apply_generator(model, u).inner(phi);
    const double rhs = u.inner(apply_adjoint(model, phi));
    duality = std::max(duality, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
    mass = std::max(mass, std::abs(apply_adjoint(model, phi).mass()));
  }
  if (!(duality < 1e-6)) failed.push_back("duality");
  if (!(mass < 1e-8)) failed.push_back("mass");
  os << "duality " << fmt("%.1e", duality) << ", mass " << fmt("%.1e", mass);

  double eigen = 0.0;
  const double xi = g.frequency(3);
  for (double alpha : {1.2, 1.5, 1.8}) {
    const auto f = GridField::sample(g, [&](double x) { return std::cos(xi * x); });
    const auto lf = fractional_laplacian(f, alpha);
    for (std::size_t i = 0; i < g.size(); ++i) eigen = std::max(eigen, std::abs(lf[i] - std::pow(xi, alpha) * f[i]));
  }
  if (!(eigen < 1e-10)) failed.push_back("eigenfunction");
  os << ", eigen " << fmt("%.1e", eigen);

  const auto st = solve_stationary(model, g);
  const auto pert = perturbations::inverse_quadratic();
  const auto conj = solve_conjugate(model, st.density, pert);
  if (!(conj.residual < 1e-6)) failed.push_back("conjugate residual");
  if (!(std::abs(conj.v.mass()) < 1e-8)) failed.push_back("gauge");
  os << ", conj residual " << fmt("%.1e", conj.residual) << ", v mass " << fmt("%.1e", std::abs(conj.v.mass()));

  const DifferenceStencil stencil(51, 0.1, 5);
  const auto d = stencil.apply(std::vector<double>(51, 3.7));
  const bool exact = std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; });
  ResponseSpec rs;
  rs.t_grid = {0.1, 1.0};
  const auto r1 = response_seifert(model, GridField(g, std::vector<double>(g.size(), 1.0)),
                                   observables::constant(1.0), 2000, rs, 708);
  const bool seifert_const = std::all_of(r1.values.begin(), r1.values.end(), [](double v) { return v == 0.0; });
  if (!exact || !seifert_const) failed.push_back("stencil on constants");

  VerifyConfig vc;
  vc.n_traj = 5000;
  vc.flip_y_sign = true;
  const auto rep = verify_fdt(vc);
  if (rep.failure || rep.pass) failed.push_back("negative control");
  os << ", control " << (rep.pass ? "passed" : "failed");

  const double secs = elapsed(t0);
  if (!(secs < 60.0)) failed.push_back("runtime");
  os << ", " << fmt("%.1f", secs) << " s (< 60 s)";
  for (const auto& f : failed) os << "; broken: " << f;
  return {failed.empty(), os.str()};
}

Outcome heat_kernel() {
  const auto rep = heat_kernel_diagnostic(models::free_motion(1.0, 1.5), 0.05, 0.0);
  const double rel = std::abs(rep.peak_ratio / rep.expected_peak_ratio - 1.0);
  return {rep.within_band && rep.finite && rel < 0.05,
          "ratio band [" + fmt("%.3f", rep.ratio_min) + ", " + fmt("%.3f", rep.ratio_max) +
              "] in [0.1, 10], peak ratio " + fmt("%.4f", rep.peak_ratio) + " vs " +
              fmt("%.4f", rep.expected_peak_ratio) + " (" + fmt("%.2f", 100.0 * rel) + "% < 5%)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"stable sampler characteristic function", stable_cf},
      {"stable-OU stationary oracle", stationary_oracle},
      {"Monte Carlo vs PDE stationary density", mc_pde_density},
      {"flagship four-route cross-validation", flagship},
      {"first-order perturbation order", epsilon_order},
      {"moment boundedness on tanh-well", moment_slope},
      {"structural invariant suite", structural},
      {"heat-kernel diagnostic", heat_kernel},
  };
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));

  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!chosen.empty() && !chosen.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
