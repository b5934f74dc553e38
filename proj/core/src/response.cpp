#include "levyfdt/response.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <limits>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "levyfdt/ensemble.hpp"
#include "levyfdt/errors.hpp"
#include "levyfdt/log.hpp"
#include "levyfdt/nonlocal.hpp"
#include "levyfdt/rng.hpp"

namespace levyfdt {

const char* to_string(ResponseMethod m) {
  switch (m) {
    case ResponseMethod::direct: return "direct";
    case ResponseMethod::agarwal: return "agarwal";
    case ResponseMethod::seifert: return "seifert";
    case ResponseMethod::semigroup: return "semigroup";
  }
  return "direct";
}

std::vector<std::string> response_method_names() {
  return {"direct", "agarwal", "seifert", "semigroup"};
}

ResponseMethod parse_response_method(const std::string& s) {
  if (s == "direct") return ResponseMethod::direct;
  if (s == "agarwal") return ResponseMethod::agarwal;
  if (s == "seifert") return ResponseMethod::seifert;
  if (s == "semigroup") return ResponseMethod::semigroup;
  throw InvalidArgument("unknown response method '" + s + "'");
}

void ResponseCurve::validate() const {
  if (times.size() != values.size() || times.size() != stderr_.size()) {
    throw InvalidArgument("response curve columns differ in length");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidArgument("response times must increase strictly");
  }
  for (double s : stderr_) {
    if (!(s >= 0.0)) throw InvalidArgument("response stderr must be non-negative");
  }
}

std::size_t TimeGrid::size() const {
  if (!(dt > 0.0) || !(t_max >= dt)) throw InvalidArgument("response time grid is invalid");
  return static_cast<std::size_t>(std::llround(t_max / dt)) + 1;
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> t(size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) * dt;
  return t;
}

// ---------------------------------------------------------------------------
// Differencing

DifferenceStencil::DifferenceStencil(std::size_t n_points, double dt, std::size_t window)
    : window_(window) {
  if (window < 3 || window % 2 == 0) throw InvalidArgument("difference window must be odd and >= 3");
  if (n_points < window) throw InvalidArgument("difference window longer than the series");
  if (!(dt > 0.0)) throw InvalidArgument("difference spacing must be positive");
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  const auto n = static_cast<std::ptrdiff_t>(n_points);
  const auto w = static_cast<std::ptrdiff_t>(window);
  double sum_k2 = 0.0;
  for (std::ptrdiff_t k = 1; k <= half; ++k) sum_k2 += 2.0 * static_cast<double>(k * k);

  rows_.resize(n_points);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& row = rows_[static_cast<std::size_t>(i)];
    if (i >= half && i < n - half) {
      // Centred quadratic fit: the quadratic term drops out.
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        if (k != 0) row.emplace_back(k, static_cast<double>(k) / (sum_k2 * dt));
      }
      continue;
    }
    const std::ptrdiff_t start = std::clamp<std::ptrdiff_t>(i - half, 0, n - w);
    Eigen::MatrixXd V(window, 3);
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      const double u = static_cast<double>(start + j - i) * dt;
      V(j, 0) = 1.0;
      V(j, 1) = u;
      V(j, 2) = u * u;
    }
    const Eigen::MatrixXd pinv = (V.transpose() * V).ldlt().solve(V.transpose());
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      const std::ptrdiff_t off = start + j - i;
      if (off != 0) row.emplace_back(off, pinv(1, j));
    }
  }
}

std::vector<double> DifferenceStencil::apply(std::span<const double> y) const {
  if (y.size() != rows_.size()) throw InvalidArgument("difference stencil length mismatch");
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double s = 0.0;
    for (const auto& [off, w] : rows_[i]) {
      s += w * (y[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off)] - y[i]);
    }
    out[i] = s;
  }
  return out;
}

double DifferenceStencil::weight(std::size_t i, std::size_t j) const {
  double self = 0.0, wj = 0.0;
  for (const auto& [off, w] : rows_[i]) {
    self -= w;
    if (static_cast<std::ptrdiff_t>(i) + off == static_cast<std::ptrdiff_t>(j)) wj = w;
  }
  return i == j ? self : wj;
}

// ---------------------------------------------------------------------------
// Helpers

namespace {

// Paths are saved on the differencing grid (spacing diff_dt); curves are
// reported on the coarser response grid.
struct Sampling {
  IntegratorSpec isp;
  std::size_t n_fine = 0;
  std::size_t every = 1;  ///< fine points per response grid step
};

std::size_t exact_ratio(double a, double b, const char* what) {
  const double r = a / b;
  const auto k = static_cast<std::size_t>(std::llround(r));
  if (k == 0 || std::abs(r - static_cast<double>(k)) > 1e-6) throw InvalidArgument(what);
  return k;
}

Sampling response_sampling(const ResponseSpec& spec) {
  Sampling s;
  s.every = exact_ratio(spec.t_grid.dt, spec.diff_dt, "response grid step must be a multiple of diff_dt");
  s.isp.dt = spec.dt;
  s.isp.t_max = spec.t_grid.t_max;
  s.isp.save_stride = exact_ratio(spec.diff_dt, spec.dt, "diff_dt must be a multiple of the SDE step");
  s.isp.domain = spec.domain;
  s.isp.half_width = spec.half_width;
  s.isp.validate();
  s.n_fine = s.isp.n_saved();
  if ((s.n_fine - 1) != (spec.t_grid.size() - 1) * s.every) {
    throw InvalidArgument("response grid and horizon disagree");
  }
  return s;
}

std::vector<double> coarsen(const std::vector<double>& fine, std::size_t every) {
  std::vector<double> out;
  for (std::size_t i = 0; i < fine.size(); i += every) out.push_back(fine[i]);
  return out;
}

/// Apply a per-row linear map to block-level series and return the batch estimate.
template <class Map>
BatchEstimate blockwise(const std::vector<double>& block_values, const std::vector<double>& weights,
                        std::size_t n_times, Map&& map) {
  const std::size_t nb = weights.size();
  std::vector<double> mapped;
  mapped.reserve(block_values.size());
  for (std::size_t b = 0; b < nb; ++b) {
    const std::span<const double> row(block_values.data() + b * n_times, n_times);
    const std::vector<double> r = map(row);
    mapped.insert(mapped.end(), r.begin(), r.end());
  }
  return batch_means(mapped, weights, n_times);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<std::string> hypothesis_notes(const Observable& o, const Perturbation& k) {
  std::vector<std::string> notes;
  if (!o.in_lp) {
    notes.push_back("observable '" + o.name + "' is unbounded: outside the linear-response hypotheses (O in L^p)");
  }
  if (!k.decays()) {
    notes.push_back("perturbation '" + k.name() + "' does not satisfy |x| K(x) bounded: outside the linear-response hypotheses");
  }
  return notes;
}

std::uint64_t init_seed(std::uint64_t method_seed) { return splitmix64(method_seed ^ 0x5eed5eed5eedULL); }

}  // namespace

std::uint64_t method_seed(std::uint64_t master_seed, ResponseMethod method) {
  return splitmix64(master_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(method) + 1));
}

std::vector<double> stationary_initial_states(const SdeModel& model, const ResponseSpec& spec,
                                              std::size_t n, std::uint64_t seed) {
  SteadyStateSpec ss;
  ss.burn_in = spec.burn_in;
  ss.n_samples = n;
  ss.thinning = spec.thinning;
  ss.n_chains = spec.n_chains;
  ss.dt = spec.dt;
  ss.domain = spec.domain;
  ss.half_width = spec.half_width;
  ss.threads = spec.threads;
  auto samples = sample_steady_state(model, ss, seed);
  if (samples.warning) warn(*samples.warning);
  return std::move(samples.states);
}

// ---------------------------------------------------------------------------
// Direct route

DirectResult response_direct(const SdeModel& model, const Perturbation& perturbation,
                             const Observable& observable, std::span<const double> epsilons,
                             std::size_t n_traj, const ResponseSpec& spec,
                             std::uint64_t master_seed, double linearity_t_max) {
  if (epsilons.empty()) throw InvalidArgument("response_direct: epsilon list is empty");
  for (std::size_t j = 0; j < epsilons.size(); ++j) {
    if (!(epsilons[j] > 0.0)) throw InvalidArgument("response_direct: epsilons must be positive");
    if (j > 0 && !(epsilons[j] < epsilons[j - 1])) {
      throw InvalidArgument("response_direct: epsilons must be strictly decreasing");
    }
  }
  if (n_traj < 2) throw InvalidArgument("response_direct: n_traj must be at least 2");
  const Sampling smp = response_sampling(spec);
  const IntegratorSpec& isp = smp.isp;
  const std::size_t nt = smp.n_fine;
  const std::size_t every = smp.every;
  const std::size_t ne = epsilons.size();
  const auto times = spec.t_grid.points();
  const std::size_t nc = times.size();
  const DifferenceStencil stencil(nt, spec.diff_dt, spec.window);
  const Perturbation step = perturbation.with_time_profile(perturbations::unit_step(), "step");

  const auto init = stationary_initial_states(model, spec, n_traj, init_seed(master_seed));
  EnsembleAccumulator acc(ne, nt, n_traj, spec.n_blocks);
  std::vector<std::size_t> flagged(acc.n_blocks(), 0);
  parallel_blocks(acc.n_blocks(), spec.threads, [&](std::size_t b) {
    const auto [first, last] = acc.block_range(b);
    for (std::size_t i = first; i < last; ++i) {
      RngStream stream(master_seed, StreamDomain::trajectory, i);
      const auto path = integrate_coupled(model, init[i], isp, step, epsilons, stream);
      if (path.flagged) {
        ++flagged[b];
        continue;
      }
      for (std::size_t t = 0; t < nt; ++t) {
        const double base = observable(path.states[0][t]);
        for (std::size_t j = 0; j < ne; ++j) {
          acc.add(b, j, t, (observable(path.states[j + 1][t]) - base) / epsilons[j]);
        }
      }
    }
  });

  DirectResult res;
  res.n_flagged = std::accumulate(flagged.begin(), flagged.end(), std::size_t{0});
  if (auto w = flag_policy(res.n_flagged, n_traj)) res.warnings.push_back(*w);
  const auto weights = acc.block_weights();
  const auto notes = hypothesis_notes(observable, perturbation);

  // Lagrange extrapolation of R(eps) to eps = 0.
  std::vector<double> rich(ne, 1.0);
  for (std::size_t j = 0; j < ne; ++j) {
    for (std::size_t k = 0; k < ne; ++k) {
      if (k != j) rich[j] *= epsilons[k] / (epsilons[k] - epsilons[j]);
    }
  }

  std::vector<std::vector<double>> block_delta(ne), fine_delta(ne);
  for (std::size_t j = 0; j < ne; ++j) {
    fine_delta[j] = acc.mean(j);
    res.delta.push_back(coarsen(fine_delta[j], every));
    block_delta[j] = acc.block_means(j);
    const auto est = blockwise(block_delta[j], weights, nt,
                               [&](std::span<const double> row) { return stencil.apply(row); });
    ResponseCurve c;
    c.times = times;
    c.values = coarsen(stencil.apply(fine_delta[j]), every);
    c.stderr_ = coarsen(est.stderr_, every);
    c.method = ResponseMethod::direct;
    c.observable_name = observable.name;
    c.perturbation_name = perturbation.name();
    std::ostringstream note;
    note << "epsilon=" << epsilons[j];
    c.notes.push_back(note.str());
    res.per_epsilon.push_back(std::move(c));
  }

  // Stack the epsilon series per block so the extrapolation error is propagated jointly.
  std::vector<double> stacked;
  stacked.reserve(weights.size() * ne * nt);
  for (std::size_t b = 0; b < weights.size(); ++b) {
    for (std::size_t j = 0; j < ne; ++j) {
      stacked.insert(stacked.end(), block_delta[j].begin() + static_cast<std::ptrdiff_t>(b * nt),
                     block_delta[j].begin() + static_cast<std::ptrdiff_t>((b + 1) * nt));
    }
  }
  const auto extrapolate = [&](std::span<const double> row) {
    std::vector<double> r(nt, 0.0);
    for (std::size_t j = 0; j < ne; ++j) {
      const auto rj = stencil.apply(row.subspan(j * nt, nt));
      for (std::size_t t = 0; t < nt; ++t) r[t] += rich[j] * rj[t];
    }
    return r;
  };
  const auto est = blockwise(stacked, weights, ne * nt, [&](std::span<const double> row) {
    auto r = extrapolate(row);
    r.resize(ne * nt, 0.0);
    return r;
  });
  std::vector<double> pooled;
  for (std::size_t j = 0; j < ne; ++j) pooled.insert(pooled.end(), fine_delta[j].begin(), fine_delta[j].end());

  res.curve.times = times;
  res.curve.values = coarsen(extrapolate(pooled), every);
  res.curve.stderr_ = coarsen(std::vector<double>(est.stderr_.begin(), est.stderr_.begin() + static_cast<std::ptrdiff_t>(nt)), every);
  res.curve.method = ResponseMethod::direct;
  res.curve.observable_name = observable.name;
  res.curve.perturbation_name = perturbation.name();
  res.curve.notes = notes;
  {
    std::ostringstream note;
    note << "step forcing, window " << spec.window << " points at spacing " << spec.diff_dt
         << ", extrapolated over " << ne << " epsilons";
    res.curve.notes.push_back(note.str());
  }

  LinearityReport& lin = res.linearity;
  lin.epsilons.assign(epsilons.begin(), epsilons.end());
  lin.times = times;
  lin.t_max = linearity_t_max;
  for (std::size_t j = 0; j + 1 < ne; ++j) {
    std::vector<double> rho(nc);
    for (std::size_t t = 0; t < nc; ++t) rho[t] = epsilons[j] * (res.delta[j][t] - res.delta[j + 1][t]);
    lin.remainders.push_back(std::move(rho));
  }
  std::size_t decreasing = 0, counted = 0;
  for (std::size_t j = 0; j + 1 < lin.remainders.size(); ++j) {
    std::vector<double> ord(nc, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> window;
    const double lr = std::log(epsilons[j] / epsilons[j + 1]);
    for (std::size_t t = 0; t < nc; ++t) {
      const double a = std::abs(lin.remainders[j][t]);
      const double b = std::abs(lin.remainders[j + 1][t]);
      if (a > 0.0 && b > 0.0) ord[t] = std::log(a / b) / lr;
      if (times[t] > 0.0 && times[t] <= linearity_t_max + 1e-12) {
        if (std::isfinite(ord[t])) window.push_back(ord[t]);
        ++counted;
        if (a > b) ++decreasing;
      }
    }
    lin.median_order.push_back(median(window));
    lin.orders.push_back(std::move(ord));
  }
  if (counted > 0 && 2 * decreasing < counted) {
    lin.monotone = false;
    lin.notes.push_back("epsilon remainders do not shrink at most times: noise dominates the nonlinearity");
  }
  if (ne < 3) lin.notes.push_back("an order estimate needs at least three epsilons");
  return res;
}

// ---------------------------------------------------------------------------
// Stationary correlation routes

Correlation stationary_correlation(const SdeModel& model, const GridField& W,
                                   const Observable& observable, std::size_t n_traj,
                                   const ResponseSpec& spec, std::uint64_t master_seed) {
  if (n_traj < 2) throw InvalidArgument("stationary correlation needs at least 2 trajectories");
  const Sampling smp = response_sampling(spec);
  const IntegratorSpec& isp = smp.isp;
  const std::size_t nt = smp.n_fine;
  const double L = W.grid().half_width();
  const auto init = stationary_initial_states(model, spec, n_traj, init_seed(master_seed));

  EnsembleAccumulator acc(1, nt, n_traj, spec.n_blocks);
  std::vector<std::size_t> flagged(acc.n_blocks(), 0), excluded(acc.n_blocks(), 0);
  parallel_blocks(acc.n_blocks(), spec.threads, [&](std::size_t b) {
    const auto [first, last] = acc.block_range(b);
    for (std::size_t i = first; i < last; ++i) {
      const double x0 = init[i];
      if (x0 < -L || x0 >= L) {
        ++excluded[b];
        continue;
      }
      const double w0 = W.interpolate(x0);
      RngStream stream(master_seed, StreamDomain::trajectory, i);
      const auto path = integrate_path(model, std::span<const double>(&x0, 1), isp, std::nullopt, stream);
      if (path.flagged) {
        ++flagged[b];
        continue;
      }
      for (std::size_t t = 0; t < nt; ++t) acc.add(b, 0, t, observable(path.states[t]) * w0);
    }
  });

  Correlation c;
  c.times.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) c.times[t] = static_cast<double>(t) * spec.diff_dt;
  c.block_values = acc.block_means(0);
  c.block_weights = acc.block_weights();
  const auto est = batch_means(c.block_values, c.block_weights, nt);
  c.values = acc.mean(0);
  c.stderr_ = est.stderr_;
  c.excluded = std::accumulate(excluded.begin(), excluded.end(), std::size_t{0});
  c.n_flagged = std::accumulate(flagged.begin(), flagged.end(), std::size_t{0});
  flag_policy(c.n_flagged + c.excluded, n_traj);
  return c;
}

ResponseCurve response_agarwal(const SdeModel& model, const GridField& Y,
                               const Observable& observable, std::size_t n_traj,
                               const ResponseSpec& spec, std::uint64_t master_seed,
                               const std::string& perturbation_name) {
  const Correlation c = stationary_correlation(model, Y, observable, n_traj, spec, master_seed);
  const std::size_t every = response_sampling(spec).every;
  ResponseCurve r;
  r.times = spec.t_grid.points();
  r.values = coarsen(c.values, every);
  r.stderr_ = coarsen(c.stderr_, every);
  r.method = ResponseMethod::agarwal;
  r.observable_name = observable.name;
  r.perturbation_name = perturbation_name;
  if (c.excluded > 0) r.notes.push_back(std::to_string(c.excluded) + " initial states off the grid excluded");
  return r;
}

ResponseCurve response_seifert(const SdeModel& model, const GridField& U,
                               const Observable& observable, std::size_t n_traj,
                               const ResponseSpec& spec, std::uint64_t master_seed,
                               const std::string& perturbation_name) {
  const Correlation c = stationary_correlation(model, U, observable, n_traj, spec, master_seed);
  const std::size_t every = response_sampling(spec).every;
  const std::size_t nt = c.times.size();
  const DifferenceStencil stencil(nt, spec.diff_dt, spec.window);
  const auto est = blockwise(c.block_values, c.block_weights, nt,
                             [&](std::span<const double> row) { return stencil.apply(row); });
  ResponseCurve r;
  r.times = spec.t_grid.points();
  r.values = coarsen(stencil.apply(c.values), every);
  r.stderr_ = coarsen(est.stderr_, every);
  r.method = ResponseMethod::seifert;
  r.observable_name = observable.name;
  r.perturbation_name = perturbation_name;
  std::ostringstream note;
  note << "quadratic differencing window " << spec.window << " points at spacing " << spec.diff_dt;
  r.notes.push_back(note.str());
  if (c.excluded > 0) r.notes.push_back(std::to_string(c.excluded) + " initial states off the grid excluded");
  return r;
}

// ---------------------------------------------------------------------------
// Semigroup route

namespace {

std::vector<double> semigroup_values(const SdeModel& model, const GridField& g0, const GridField& o,
                                     const TimeGrid& t_grid, FpSolveSpec fp) {
  fp.t_end = t_grid.t_max;
  const Evolution ev = evolve_signed(model, g0, fp, t_grid.dt);
  if (ev.times.size() != t_grid.size()) throw NumericalError("semigroup snapshots do not match the time grid");
  std::vector<double> r(ev.times.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = o.inner(ev.snapshots[i]);
  return r;
}

}  // namespace

ResponseCurve response_semigroup(const SdeModel& model, const GridField& p_ss,
                                 const Perturbation& perturbation, const Observable& observable,
                                 const TimeGrid& t_grid, const FpSolveSpec& spec) {
  const GridField g0 = perturbation_adjoint(perturbation, p_ss);
  const GridField o = GridField::sample(p_ss.grid(), [&](double x) { return observable(x); },
                                        FieldKind::observable);
  const auto coarse = semigroup_values(model, g0, o, t_grid, spec);
  FpSolveSpec fine = spec;
  fine.dt = 0.5 * spec.dt;
  const auto refined = semigroup_values(model, g0, o, t_grid, fine);

  ResponseCurve r;
  r.times = t_grid.points();
  r.values = refined;
  r.stderr_.resize(refined.size());
  for (std::size_t i = 0; i < refined.size(); ++i) r.stderr_[i] = std::abs(refined[i] - coarse[i]);
  r.method = ResponseMethod::semigroup;
  r.observable_name = observable.name;
  r.perturbation_name = perturbation.name();
  r.notes = hypothesis_notes(observable, perturbation);
  r.notes.push_back("stderr column holds |R(dt) - R(dt/2)|");
  return r;
}

double response_at_zero(const GridField& p_ss, const Perturbation& perturbation,
                        const Observable& observable) {
  double s = 0.0;
  const Grid1D& g = p_ss.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    const double step = 1e-5 * (1.0 + std::abs(x));
    const double dO = (observable(x + step) - observable(x - step)) / (2.0 * step);
    s += perturbation.space_field_1d(x) * dO * p_ss[i];
  }
  return s * g.spacing();
}

// ---------------------------------------------------------------------------
// Comparison and orchestration

PairwiseCheck compare_curves(const ResponseCurve& a, const ResponseCurve& b, CheckKind kind,
                             const Tolerances& tol, double t_lo, double t_hi) {
  if (a.times.size() != b.times.size()) throw InvalidArgument("compared curves have different grids");
  PairwiseCheck c;
  c.a = to_string(a.method);
  c.b = to_string(b.method);
  c.pass = true;
  double worst = -1.0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-9) throw InvalidArgument("compared curves have different grids");
    const double t = a.times[i];
    if (t < t_lo - 1e-12 || t > t_hi + 1e-12) continue;
    const double diff = std::abs(a.values[i] - b.values[i]);
    const double se = std::hypot(a.stderr_[i], b.stderr_[i]);
    double bound = tol.sigma_multiple * se;
    if (kind == CheckKind::mc_pde) bound = std::max(bound, tol.mc_pde_floor);
    if (kind == CheckKind::direct_pde) bound = std::max(bound, tol.direct_pde_floor);
    if (!(diff <= bound)) c.pass = false;
    c.sup_diff = std::max(c.sup_diff, diff);
    const double score = bound > 0.0 ? diff / bound : (diff > 0.0 ? HUGE_VAL : 0.0);
    if (score > worst) {
      worst = score;
      c.tol = bound;
      c.worst_t = t;
    }
  }
  return c;
}

VerifyReport verify_fdt(const VerifyConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  VerifyReport rep;
  rep.scenario = cfg.scenario;
  const std::array methods{ResponseMethod::direct, ResponseMethod::agarwal, ResponseMethod::seifert};
  for (auto m : methods) rep.seeds.emplace_back(to_string(m), method_seed(cfg.seed, m));
  rep.seeds.emplace_back("master", cfg.seed);

  ResponseSpec rs = cfg.response;
  rs.half_width = cfg.grid_half_width;
  try {
    const Grid1D grid(cfg.grid_half_width, cfg.grid_points);
    StationaryResult st = solve_stationary(cfg.model, grid, cfg.fp);
    rep.stationary_log = st.log;
    for (const auto& w : st.log.warnings) rep.warnings.push_back(w);
    const GridField& p = st.density;
    rep.r0_quadrature = response_at_zero(p, cfg.perturbation, cfg.observable);

    AgarwalObservable ag = agarwal_observable(p, cfg.perturbation);
    if (cfg.flip_y_sign) {
      for (double& v : ag.Y.values()) v = -v;
      rep.warnings.push_back("negative control: Y sign flipped");
    }
    const AdjointSystem sys(cfg.model, grid);
    const ConjugateSolution conj = solve_conjugate(sys, p, cfg.perturbation);

    FpSolveSpec fp = cfg.fp;
    ResponseCurve semi = response_semigroup(cfg.model, p, cfg.perturbation, cfg.observable, rs.t_grid, fp);
    ResponseCurve agar = response_agarwal(cfg.model, ag.Y, cfg.observable, cfg.n_traj, rs,
                                          method_seed(cfg.seed, ResponseMethod::agarwal),
                                          cfg.perturbation.name());
    ResponseCurve seif = response_seifert(cfg.model, conj.U, cfg.observable, cfg.n_traj, rs,
                                          method_seed(cfg.seed, ResponseMethod::seifert),
                                          cfg.perturbation.name());
    DirectResult dir = response_direct(cfg.model, cfg.perturbation, cfg.observable, cfg.epsilons,
                                       cfg.n_traj, rs, method_seed(cfg.seed, ResponseMethod::direct));
    for (const auto& w : dir.warnings) rep.warnings.push_back(w);
    rep.linearity = dir.linearity;

    const auto& tol = cfg.tolerances;
    const double lo = cfg.check_t_lo, hi = cfg.check_t_hi;
    rep.checks.push_back(compare_curves(dir.curve, agar, CheckKind::mc_mc, tol, lo, hi));
    rep.checks.push_back(compare_curves(dir.curve, seif, CheckKind::mc_mc, tol, lo, hi));
    rep.checks.push_back(compare_curves(agar, seif, CheckKind::mc_mc, tol, lo, hi));
    rep.checks.push_back(compare_curves(agar, semi, CheckKind::mc_pde, tol, lo, hi));
    rep.checks.push_back(compare_curves(seif, semi, CheckKind::mc_pde, tol, lo, hi));
    rep.checks.push_back(compare_curves(dir.curve, semi, CheckKind::direct_pde, tol, lo, hi));
    rep.curves = {std::move(dir.curve), std::move(agar), std::move(seif), std::move(semi)};
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const PairwiseCheck& c) { return c.pass; });
  } catch (const Error& e) {
    rep.failure = e.what();
    rep.pass = false;
  }
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace levyfdt
