#include "levyfdt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "levyfdt/ensemble.hpp"
#include "levyfdt/errors.hpp"
#include "levyfdt/stable.hpp"

namespace levyfdt {

void IntegratorSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("integrator: dt must be positive");
  if (!(t_max >= dt)) throw InvalidArgument("integrator: t_max must be at least dt");
  if (save_stride < 1) throw InvalidArgument("integrator: save_stride must be >= 1");
  if (domain == Domain::periodic && !(half_width > 0.0)) {
    throw InvalidArgument("integrator: periodic half width must be positive");
  }
}

std::size_t IntegratorSpec::n_steps() const {
  // Tolerate t_max/dt landing a hair below an integer.
  return static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
}

double IntegratorSpec::saved_time(std::size_t i) const {
  return static_cast<double>(i * save_stride) * dt;
}

double wrap_periodic(double x, double half_width) {
  if (x >= -half_width && x < half_width) return x;
  const double period = 2.0 * half_width;
  double y = std::fmod(x + half_width, period);
  if (y < 0.0) y += period;
  y -= half_width;
  return y >= half_width ? -half_width : y;
}

namespace {

bool finite_span(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

struct Stepper1d {
  const SdeModel& model;
  const Perturbation* pert;
  double eps;
  double dt;
  double scale;
  bool periodic;
  double L;

  double step(double x, double t, double noise) const {
    double drift = model.drift_1d(x);
    if (pert != nullptr && eps != 0.0) {
      drift += eps * pert->time_profile(t) * pert->space_field_1d(x);
    }
    double y = x + drift * dt + model.diffusion_1d(x) * (scale * noise);
    if (periodic && std::isfinite(y)) y = wrap_periodic(y, L);
    return y;
  }
};

}  // namespace

Trajectory integrate_path(const SdeModel& model, std::span<const double> x0,
                          const IntegratorSpec& spec, std::optional<Drive> drive,
                          RngStream& stream) {
  spec.validate();
  const int n = model.dim();
  const auto d = static_cast<std::size_t>(n);
  if (x0.size() != d) throw InvalidArgument("integrate_path: x0 has the wrong dimension");
  const Perturbation* pert = drive ? drive->perturbation : nullptr;
  const double eps = drive ? drive->epsilon : 0.0;
  if (!std::isfinite(eps)) throw InvalidArgument("integrate_path: epsilon must be finite");
  if (pert != nullptr && pert->dim() != n) {
    throw InvalidArgument("integrate_path: perturbation dimension mismatch");
  }

  const std::size_t steps = spec.n_steps();
  const std::size_t saved = spec.n_saved();
  const double scale = increment_scale(model.alpha(), spec.dt);
  const bool periodic = spec.domain == Domain::periodic;

  Trajectory traj;
  traj.dim = n;
  traj.times.resize(saved);
  for (std::size_t i = 0; i < saved; ++i) traj.times[i] = spec.saved_time(i);
  traj.states.assign(saved * d, std::numeric_limits<double>::quiet_NaN());
  std::copy(x0.begin(), x0.end(), traj.states.begin());

  if (model.is_scalar()) {
    const Stepper1d st{model, pert, eps, spec.dt, scale, periodic, spec.half_width};
    double x = periodic ? wrap_periodic(x0[0], spec.half_width) : x0[0];
    traj.states[0] = x;
    for (std::size_t k = 0; k < steps; ++k) {
      x = st.step(x, static_cast<double>(k) * spec.dt, draw_standard_stable(model.alpha(), stream));
      if (!std::isfinite(x)) {
        traj.flagged = true;
        traj.flag_step = k + 1;
        return traj;
      }
      if ((k + 1) % spec.save_stride == 0) traj.states[(k + 1) / spec.save_stride] = x;
    }
    return traj;
  }

  std::vector<double> x(x0.begin(), x0.end()), b(d), kf(d), sig(d * d), noise(d);
  if (periodic) {
    for (double& c : x) c = wrap_periodic(c, spec.half_width);
  }
  std::copy(x.begin(), x.end(), traj.states.begin());
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    model.drift(x, b);
    if (pert != nullptr && eps != 0.0) {
      pert->space_field(x, kf);
      const double f = eps * pert->time_profile(t);
      for (std::size_t i = 0; i < d; ++i) b[i] += f * kf[i];
    }
    model.diffusion(x, sig);
    draw_stable(model.stable(), stream, noise);
    for (std::size_t i = 0; i < d; ++i) {
      double jump = 0.0;
      for (std::size_t j = 0; j < d; ++j) jump += sig[i * d + j] * noise[j];
      b[i] = x[i] + b[i] * spec.dt + scale * jump;
    }
    x.swap(b);
    if (periodic) {
      for (double& c : x) c = wrap_periodic(c, spec.half_width);
    }
    if (!finite_span(x)) {
      traj.flagged = true;
      traj.flag_step = k + 1;
      return traj;
    }
    if ((k + 1) % spec.save_stride == 0) {
      std::copy(x.begin(), x.end(), traj.states.begin() + ((k + 1) / spec.save_stride) * d);
    }
  }
  return traj;
}

CoupledTrajectory integrate_coupled(const SdeModel& model, double x0, const IntegratorSpec& spec,
                                    const Perturbation& perturbation,
                                    std::span<const double> epsilons, RngStream& stream) {
  spec.validate();
  if (!model.is_scalar()) throw InvalidArgument("integrate_coupled: 1D models only");
  const std::size_t variants = epsilons.size() + 1;
  const std::size_t steps = spec.n_steps();
  const std::size_t saved = spec.n_saved();
  const double scale = increment_scale(model.alpha(), spec.dt);
  const bool periodic = spec.domain == Domain::periodic;
  if (periodic) x0 = wrap_periodic(x0, spec.half_width);

  CoupledTrajectory out;
  out.states.assign(variants, std::vector<double>(saved, x0));
  std::vector<double> x(variants, x0);
  std::vector<double> eps(variants, 0.0);
  std::copy(epsilons.begin(), epsilons.end(), eps.begin() + 1);

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    const double f = perturbation.time_profile(t);
    const double jump = scale * draw_standard_stable(model.alpha(), stream);
    for (std::size_t v = 0; v < variants; ++v) {
      const double xv = x[v];
      double drift = model.drift_1d(xv);
      if (eps[v] != 0.0) drift += eps[v] * f * perturbation.space_field_1d(xv);
      double y = xv + drift * spec.dt + model.diffusion_1d(xv) * jump;
      if (periodic && std::isfinite(y)) y = wrap_periodic(y, spec.half_width);
      if (!std::isfinite(y)) {
        out.flagged = true;
        return out;
      }
      x[v] = y;
    }
    if ((k + 1) % spec.save_stride == 0) {
      const std::size_t i = (k + 1) / spec.save_stride;
      for (std::size_t v = 0; v < variants; ++v) out.states[v][i] = x[v];
    }
  }
  return out;
}

namespace observables {

Observable constant(double c) {
  return {"constant", [c](std::span<const double>) { return c; }, true};
}

Observable tanh_x() {
  return {"tanh", [](std::span<const double> x) { return std::tanh(x[0]); }, true};
}

Observable identity() {
  return {"x", [](std::span<const double> x) { return x[0]; }, false};
}

Observable rational() {
  return {"rational", [](std::span<const double> x) { return x[0] / (1.0 + x[0] * x[0]); }, true};
}

Observable bump(double center, double half_width, double edge) {
  if (!(half_width > 0.0) || !(edge > 0.0)) throw InvalidArgument("bump: widths must be positive");
  return {"bump",
          [=](std::span<const double> x) {
            const double r = std::abs(x[0] - center);
            return 0.5 * (1.0 - std::tanh((r - half_width) / edge));
          },
          true};
}

Observable moment() {
  return {"moment",
          [](std::span<const double> x) {
            double s = 1.0;
            for (double c : x) s += c * c;
            return std::sqrt(s);
          },
          false};
}

Observable cos_xi(double xi) {
  return {"cos", [xi](std::span<const double> x) { return std::cos(xi * x[0]); }, true};
}

std::vector<std::string> names() { return {"constant", "tanh", "x", "rational", "bump", "moment"}; }

Observable by_name(const std::string& name) {
  if (name == "constant") return constant();
  if (name == "tanh") return tanh_x();
  if (name == "x") return identity();
  if (name == "rational") return rational();
  if (name == "bump") return bump();
  if (name == "moment") return moment();
  throw InvalidArgument("unknown observable '" + name + "'");
}

}  // namespace observables

InitialLaw InitialLaw::fixed(std::vector<double> x0) {
  if (x0.empty()) throw InvalidArgument("initial state must be non-empty");
  const int d = static_cast<int>(x0.size());
  return InitialLaw(std::move(x0), d);
}

InitialLaw InitialLaw::pool(std::vector<double> states, int dim) {
  if (dim < 1 || states.empty() || states.size() % static_cast<std::size_t>(dim) != 0) {
    throw InvalidArgument("initial pool shape is inconsistent");
  }
  return InitialLaw(std::move(states), dim);
}

std::span<const double> InitialLaw::state(std::size_t traj) const {
  const auto d = static_cast<std::size_t>(dim_);
  const std::size_t i = traj % size();
  return {states_.data() + i * d, d};
}

std::optional<std::string> flag_policy(std::size_t flagged, std::size_t total) {
  if (flagged == 0 || total == 0) return std::nullopt;
  const double frac = static_cast<double>(flagged) / static_cast<double>(total);
  std::ostringstream msg;
  msg << flagged << " of " << total << " trajectories diverged (" << 100.0 * frac << "%)";
  if (frac > kFlagErrorFraction) throw NumericalError(msg.str() + ", above the 10% limit");
  if (frac > kFlagWarnFraction) return msg.str() + "; estimates may be biased in the tails";
  return std::nullopt;
}

EnsembleResult run_ensemble(const SdeModel& model, const InitialLaw& init,
                            const IntegratorSpec& spec, std::optional<Drive> drive,
                            const std::vector<Observable>& observables, std::size_t n_traj,
                            std::uint64_t master_seed, const EnsembleOptions& options) {
  spec.validate();
  if (n_traj < 2) throw InvalidArgument("run_ensemble: n_traj must be at least 2");
  if (init.dim() != model.dim()) throw InvalidArgument("run_ensemble: initial law dimension mismatch");
  const std::size_t n_obs = observables.size();
  const std::size_t n_times = spec.n_saved();

  // A trailing counter series keeps block weights meaningful with no observables.
  EnsembleAccumulator acc(n_obs + 1, n_times, n_traj, options.n_blocks);
  std::vector<std::size_t> flagged(acc.n_blocks(), 0);

  parallel_blocks(acc.n_blocks(), options.threads, [&](std::size_t b) {
    const auto [first, last] = acc.block_range(b);
    for (std::size_t i = first; i < last; ++i) {
      RngStream stream(master_seed, options.stream_domain, i);
      const Trajectory traj = integrate_path(model, init.state(i), spec, drive, stream);
      if (traj.flagged) {
        ++flagged[b];
        continue;
      }
      for (std::size_t t = 0; t < n_times; ++t) {
        const auto x = traj.state(t);
        for (std::size_t o = 0; o < n_obs; ++o) acc.add(b, o, t, observables[o](x));
        acc.add(b, n_obs, t, 1.0);
      }
    }
  });

  EnsembleResult res;
  res.n_traj = n_traj;
  res.n_flagged = std::accumulate(flagged.begin(), flagged.end(), std::size_t{0});
  res.warning = flag_policy(res.n_flagged, n_traj);
  res.seed = master_seed;
  res.model_name = model.name();
  res.times.resize(n_times);
  for (std::size_t t = 0; t < n_times; ++t) res.times[t] = spec.saved_time(t);
  for (std::size_t o = 0; o < n_obs; ++o) {
    res.observable_names.push_back(observables[o].name);
    res.observable_mean.push_back(acc.mean(o));
    res.stderr_.push_back(acc.stderr_iid(o));
    res.block_means.push_back(acc.block_means(o));
  }
  res.block_weights = acc.block_weights();
  return res;
}

std::pair<double, double> linear_functional(const EnsembleResult& result, std::size_t observable,
                                            std::span<const double> weights) {
  const std::size_t n_times = result.times.size();
  if (weights.size() != n_times) throw InvalidArgument("linear_functional: weight length mismatch");
  const std::size_t nb = result.block_weights.size();
  std::vector<double> vals(nb, 0.0);
  const auto& bm = result.block_means.at(observable);
  for (std::size_t b = 0; b < nb; ++b) {
    double s = 0.0;
    for (std::size_t t = 0; t < n_times; ++t) s += weights[t] * bm[b * n_times + t];
    vals[b] = s;
  }
  const BatchEstimate est = batch_means(vals, result.block_weights, 1);
  return {est.value[0], est.stderr_[0]};
}

std::vector<double> slope_weights(std::span<const double> t) {
  if (t.size() < 2) throw InvalidArgument("slope needs at least two points");
  const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
  double sxx = 0.0;
  for (double v : t) sxx += (v - mean) * (v - mean);
  std::vector<double> w(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) w[i] = (t[i] - mean) / sxx;
  return w;
}

SteadyStateSamples sample_steady_state(const SdeModel& model, const SteadyStateSpec& spec,
                                       std::uint64_t master_seed) {
  if (!(spec.burn_in > 0.0)) throw InvalidArgument("sample_steady_state: burn_in must be positive");
  if (spec.n_samples == 0) throw InvalidArgument("sample_steady_state: n_samples must be positive");
  if (!(spec.thinning > 0.0)) throw InvalidArgument("sample_steady_state: thinning must be positive");
  const auto d = static_cast<std::size_t>(model.dim());
  const std::size_t chains =
      spec.n_chains > 0 ? std::min(spec.n_chains, spec.n_samples)
                        : std::min<std::size_t>(spec.n_samples, 1000);
  std::vector<double> start = spec.start.empty() ? std::vector<double>(d, 0.0) : spec.start;
  if (start.size() != d) throw InvalidArgument("sample_steady_state: start has the wrong dimension");

  IntegratorSpec burn;
  burn.dt = spec.dt;
  burn.t_max = spec.burn_in;
  burn.save_stride = burn.n_steps();
  burn.domain = spec.domain;
  burn.half_width = spec.half_width;

  IntegratorSpec thin = burn;
  thin.t_max = spec.thinning;
  thin.save_stride = thin.n_steps();
  if (thin.save_stride == 0) throw InvalidArgument("sample_steady_state: thinning below dt");

  SteadyStateSamples out;
  out.dim = model.dim();
  out.n_chains = chains;
  out.states.assign(spec.n_samples * d, 0.0);
  std::vector<std::size_t> restarts(chains, 0);

  parallel_blocks(chains, spec.threads, [&](std::size_t c) {
    const std::size_t first = c * spec.n_samples / chains;
    const std::size_t last = (c + 1) * spec.n_samples / chains;
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > spec.max_restarts) {
        throw NumericalError("sample_steady_state: chain " + std::to_string(c) +
                             " kept diverging");
      }
      RngStream stream(master_seed, StreamDomain::chain, c + (attempt << 32));
      Trajectory seg = integrate_path(model, start, burn, std::nullopt, stream);
      bool ok = !seg.flagged;
      for (std::size_t i = first; ok && i < last; ++i) {
        std::vector<double> x(seg.state(seg.times.size() - 1).begin(),
                              seg.state(seg.times.size() - 1).end());
        seg = integrate_path(model, x, thin, std::nullopt, stream);
        if (seg.flagged) {
          ok = false;
          break;
        }
        const auto s = seg.state(seg.times.size() - 1);
        std::copy(s.begin(), s.end(), out.states.begin() + i * d);
      }
      if (ok) break;
      ++restarts[c];
    }
  });
  out.n_restarts = std::accumulate(restarts.begin(), restarts.end(), std::size_t{0});
  out.warning = flag_policy(out.n_restarts, chains);
  return out;
}

}  // namespace levyfdt
