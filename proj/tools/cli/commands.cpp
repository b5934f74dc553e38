#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "levyfdt/errors.hpp"
#include "levyfdt/fokker_planck.hpp"
#include "levyfdt/io.hpp"
#include "levyfdt/log.hpp"

namespace levyfdt::cli {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

Domain parse_domain(const std::string& key, const std::string& s) {
  if (s == "whole-line") return Domain::whole_line;
  if (s == "periodic") return Domain::periodic;
  throw ConfigError(key + ": expected whole-line or periodic, got '" + s + "'");
}

std::size_t positive_size(const ScenarioConfig& cfg, const std::string& key) {
  const auto v = cfg.get_int(key);
  if (v <= 0) throw ConfigError(key + " must be positive");
  return static_cast<std::size_t>(v);
}

std::size_t stride_of(double every, double dt, const std::string& key) {
  const double r = every / dt;
  const auto k = static_cast<std::size_t>(std::llround(r));
  if (k == 0 || std::abs(r - static_cast<double>(k)) > 1e-6) {
    throw ConfigError(key + " must be a positive multiple of the step");
  }
  return k;
}

FpSolveSpec build_fp_spec(const ScenarioConfig& cfg) {
  FpSolveSpec fp;
  fp.dt = cfg.get_double("solver.dt");
  fp.method = parse_fp_method(cfg.get_string("solver.method"));
  fp.stop_tol = cfg.get_double("solver.stop_tol");
  fp.warm_time = cfg.get_double("solver.warm_time");
  fp.check_interval = cfg.get_double("solver.check_interval");
  fp.boundary_mass_limit = cfg.get_double("solver.boundary_mass_limit");
  fp.stability_number = cfg.get_double("solver.stability_number");
  fp.validate();
  return fp;
}

Grid1D build_grid(const ScenarioConfig& cfg) {
  return Grid1D(cfg.get_double("grid.L"), positive_size(cfg, "grid.n_points"));
}

unsigned threads_of(const ScenarioConfig& cfg) {
  const auto t = cfg.get_int("ensemble.threads");
  if (t < 0) throw ConfigError("ensemble.threads must be >= 0");
  return static_cast<unsigned>(t);
}

std::uint64_t seed_of(const ScenarioConfig& cfg) {
  return static_cast<std::uint64_t>(cfg.get_int("ensemble.master_seed"));
}

/// Writes output files under one directory with the shared provenance header.
class Output {
 public:
  Output(const ScenarioConfig& cfg, std::string command, std::ostream& log)
      : dir_(cfg.get_string("output.directory")), log_(log) {
    prov_.config_hash = cfg.hash();
    prov_.seed = seed_of(cfg);
    prov_.extra.emplace_back("command", std::move(command));
    for (const auto& f : cfg.get_strings("output.formats")) {
      if (f == "csv") csv_ = true;
      else if (f == "json") json_ = true;
      else throw ConfigError("output.formats: unknown format '" + f + "' (expected csv, json)");
    }
    fs::create_directories(dir_);
  }

  const Provenance& provenance() const { return prov_; }
  bool csv() const { return csv_; }
  bool json() const { return json_; }

  template <class Fn>
  void write(const std::string& name, Fn&& fn) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    fn(os);
    log_ << "wrote " << path.string() << '\n';
  }

  void text(const std::string& name, const std::string& body) {
    write(name, [&](std::ostream& os) { os << body; });
  }

 private:
  fs::path dir_;
  std::ostream& log_;
  Provenance prov_;
  bool csv_ = false;
  bool json_ = false;
};

// ---------------------------------------------------------------------------

int cmd_simulate(const ScenarioConfig& cfg, std::ostream& out) {
  const SdeModel model = build_model(cfg);
  const auto observables = build_observables(cfg);
  IntegratorSpec isp;
  isp.dt = cfg.get_double("integrator.dt");
  isp.t_max = cfg.get_double("integrator.t_max");
  isp.save_stride = stride_of(cfg.get_double("integrator.save_every"), isp.dt, "integrator.save_every");
  isp.domain = parse_domain("integrator.domain", cfg.get_string("integrator.domain"));
  isp.half_width = cfg.get_double("grid.L");
  isp.validate();
  const std::size_t n_traj = positive_size(cfg, "ensemble.n_traj");
  const std::uint64_t seed = seed_of(cfg);

  const std::string initial = cfg.get_string("ensemble.initial");
  std::optional<InitialLaw> init;
  if (initial == "fixed") {
    init = InitialLaw::fixed({cfg.get_double("ensemble.x0")});
  } else if (initial == "stationary") {
    SteadyStateSpec ss;
    ss.burn_in = cfg.get_double("integrator.burn_in");
    ss.thinning = cfg.get_double("integrator.thinning");
    ss.n_samples = n_traj;
    ss.dt = isp.dt;
    ss.domain = isp.domain;
    ss.half_width = isp.half_width;
    ss.threads = threads_of(cfg);
    auto samples = sample_steady_state(model, ss, splitmix64(seed ^ 0x5eedULL));
    init = InitialLaw::pool(std::move(samples.states), 1);
  } else {
    throw ConfigError("ensemble.initial: expected fixed or stationary, got '" + initial + "'");
  }

  const Perturbation pert = build_perturbation(cfg);
  const double eps = cfg.get_double("perturbation.drive_epsilon");
  std::optional<Drive> drive;
  if (eps != 0.0) drive = Drive{&pert, eps};

  EnsembleOptions opt;
  opt.threads = threads_of(cfg);
  opt.n_blocks = positive_size(cfg, "ensemble.n_blocks");
  const EnsembleResult res = run_ensemble(model, *init, isp, drive, observables, n_traj, seed, opt);

  Output files(cfg, "simulate", out);
  if (files.csv()) {
    files.write("ensemble.csv", [&](std::ostream& os) { write_ensemble(os, res, files.provenance()); });
    const auto n_dump = static_cast<std::size_t>(std::max<std::int64_t>(0, cfg.get_int("ensemble.trajectories")));
    for (std::size_t i = 0; i < std::min(n_dump, n_traj); ++i) {
      RngStream stream(seed, StreamDomain::trajectory, i);
      const auto tr = integrate_path(model, init->state(i), isp, drive, stream);
      files.write("trajectory_" + std::to_string(i) + ".csv",
                  [&](std::ostream& os) { write_trajectory(os, tr, files.provenance()); });
    }
  }
  out << "n_traj " << res.n_traj << ", flagged " << res.n_flagged << '\n';
  if (res.warning) out << "warning: " << *res.warning << '\n';
  return kPass;
}

int cmd_stationary(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  const SdeModel model = build_model(cfg);
  const Grid1D grid = build_grid(cfg);
  const FpSolveSpec fp = build_fp_spec(cfg);
  Output files(cfg, "stationary", out);
  StationaryResult st = [&] {
    try {
      return solve_stationary(model, grid, fp);
    } catch (const SolveFailure& e) {
      if (files.json()) files.text("solve_log.json", solve_log_json(e.log(), files.provenance()));
      throw;
    }
  }();
  if (files.csv()) {
    files.write("density.csv", [&](std::ostream& os) { write_grid_field(os, st.density, files.provenance(), "p_ss"); });
  }
  if (files.json()) files.text("solve_log.json", solve_log_json(st.log, files.provenance()));
  for (const auto& w : st.log.warnings) err << "warning: " << w << '\n';
  out << "residual " << format_double(st.log.final_residual) << ", boundary mass "
      << format_double(st.log.boundary_mass) << '\n';

  if (cfg.get_string("perturbation.K") != "none" && files.csv()) {
    const Perturbation pert = build_perturbation(cfg);
    const AgarwalObservable ag = agarwal_observable(st.density, pert);
    const AdjointSystem sys(model, grid);
    const ConjugateSolution conj = solve_conjugate(sys, st.density, pert);
    files.write("Y.csv", [&](std::ostream& os) { write_grid_field(os, ag.Y, files.provenance(), "Y"); });
    files.write("v.csv", [&](std::ostream& os) { write_grid_field(os, conj.v, files.provenance(), "v"); });
    files.write("U.csv", [&](std::ostream& os) { write_grid_field(os, conj.U, files.provenance(), "U"); });
    out << "floored mass share " << format_double(ag.floor.mass_share) << ", conjugate residual "
        << format_double(conj.residual) << '\n';
  }
  return kPass;
}

void print_checks(std::ostream& out, const std::vector<PairwiseCheck>& checks) {
  for (const auto& c : checks) {
    out << std::left << std::setw(22) << (c.a + " vs " + c.b) << " sup " << format_double(c.sup_diff)
        << " tol " << format_double(c.tol) << " at t=" << format_double(c.worst_t) << "  "
        << (c.pass ? "PASS" : "FAIL") << '\n';
  }
}

int cmd_response(const ScenarioConfig& cfg, std::ostream& out) {
  const std::string method = cfg.get_string("response.method");
  auto valid = response_method_names();
  valid.push_back("all");
  if (std::find(valid.begin(), valid.end(), method) == valid.end()) {
    throw ConfigError("unknown response method '" + method + "'; valid methods: " + join(valid));
  }
  if (method == "all") {
    const VerifyConfig vc = build_verify_config(cfg);
    const VerifyReport rep = verify_fdt(vc);
    Output files(cfg, "response", out);
    if (rep.failure) throw NumericalError(*rep.failure);
    if (files.csv()) {
      for (const auto& c : rep.curves) {
        files.write(std::string("response_") + to_string(c.method) + ".csv",
                    [&](std::ostream& os) { write_response_curve(os, c, files.provenance()); });
      }
    }
    if (files.json()) files.text("pairwise.json", pairwise_json(rep.checks, files.provenance()));
    print_checks(out, rep.checks);
    return rep.pass ? kPass : kVerifyFailed;
  }

  const ResponseMethod m = parse_response_method(method);
  const SdeModel model = build_model(cfg);
  const Perturbation pert = build_perturbation(cfg);
  const auto observables = build_observables(cfg);
  if (observables.size() != 1) throw ConfigError("response takes exactly one observable");
  const Observable& obs = observables.front();
  const ResponseSpec rs = build_response_spec(cfg);
  const std::size_t n_traj = positive_size(cfg, "response.n_traj");
  const std::uint64_t seed = method_seed(seed_of(cfg), m);

  ResponseCurve curve;
  if (m == ResponseMethod::direct) {
    const auto& eps = cfg.get_doubles("perturbation.epsilons");
    curve = response_direct(model, pert, obs, eps, n_traj, rs, seed).curve;
  } else {
    const Grid1D grid = build_grid(cfg);
    const StationaryResult st = solve_stationary(model, grid, build_fp_spec(cfg));
    if (m == ResponseMethod::semigroup) {
      curve = response_semigroup(model, st.density, pert, obs, rs.t_grid, build_fp_spec(cfg));
    } else if (m == ResponseMethod::agarwal) {
      const AgarwalObservable ag = agarwal_observable(st.density, pert);
      curve = response_agarwal(model, ag.Y, obs, n_traj, rs, seed, pert.name());
    } else {
      const ConjugateSolution conj = solve_conjugate(model, st.density, pert);
      curve = response_seifert(model, conj.U, obs, n_traj, rs, seed, pert.name());
    }
  }
  Output files(cfg, "response", out);
  if (files.csv()) {
    files.write("response_" + method + ".csv",
                [&](std::ostream& os) { write_response_curve(os, curve, files.provenance()); });
  }
  return kPass;
}

int cmd_verify(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  const VerifyConfig vc = build_verify_config(cfg);
  const VerifyReport rep = verify_fdt(vc);
  Output files(cfg, "verify", out);
  if (files.json()) files.text("report.json", verify_report_json(rep, files.provenance()));
  for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
  if (rep.failure) {
    err << "error: " << *rep.failure << '\n';
    return kNumerical;
  }
  print_checks(out, rep.checks);
  out << (rep.pass ? "verification passed" : "verification failed") << '\n';
  return rep.pass ? kPass : kVerifyFailed;
}

int cmd_audit(const ScenarioConfig& cfg, std::ostream& out) {
  const SdeModel model = build_model(cfg);
  ProbeSpec probe;
  probe.half_width = cfg.get_double("audit.half_width");
  probe.samples = positive_size(cfg, "audit.samples");
  probe.holder_beta = cfg.get_double("audit.holder_beta");
  const AssumptionAudit a = audit_assumptions(model, probe, seed_of(cfg));
  Output files(cfg, "audit", out);
  if (files.json()) files.text("audit.json", audit_json(a, model.name(), files.provenance()));
  const auto& d = a.dissipativity;
  out << "dissipativity: k1 " << format_double(d.k1) << ", C1 " << format_double(d.c1) << ", verdict "
      << to_string(d.verdict) << '\n';
  out << "holder beta " << format_double(a.holder.beta) << ": drift ratio "
      << format_double(a.holder.drift_max_ratio) << ", diffusion ratio "
      << format_double(a.holder.diffusion_max_ratio) << '\n';
  return kPass;
}

int cmd_config(const ScenarioConfig& cfg, std::ostream& out, bool defaults) {
  if (defaults) {
    for (const auto& k : schema()) {
      out << k.path << ": ";
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::vector<double>>) {
              std::vector<std::string> s;
              for (double x : v) s.push_back(format_double(x));
              out << '[' << join(s) << ']';
            } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
              out << '[' << join(v) << ']';
            } else if constexpr (std::is_same_v<T, double>) {
              out << format_double(v);
            } else if constexpr (std::is_same_v<T, bool>) {
              out << (v ? "true" : "false");
            } else if constexpr (std::is_same_v<T, std::string>) {
              out << '"' << v << '"';
            } else {
              out << v;
            }
          },
          k.fallback);
      out << "    # " << k.help << '\n';
    }
    return kPass;
  }
  out << cfg.canonical() << '\n' << "# config_hash: " << cfg.hash() << '\n';
  return kPass;
}

}  // namespace

// ---------------------------------------------------------------------------
// Builders

SdeModel build_model(const ScenarioConfig& cfg) {
  const std::string& name = cfg.get_string("model.name");
  const double alpha = cfg.get_double("model.alpha");
  const double sigma = cfg.get_double("model.sigma");
  if (name == "stable-ou") return models::stable_ou(cfg.get_double("model.lambda"), sigma, alpha);
  if (name == "tanh-well") return models::tanh_well(cfg.get_double("model.a"), sigma, alpha);
  if (name == "free") return models::free_motion(sigma, alpha);
  if (name == "custom") {
    const std::string& drift = cfg.get_string("model.drift");
    if (drift.empty()) throw ConfigError("model.drift is required for a custom model");
    return models::custom({drift}, {cfg.get_string("model.diffusion")}, alpha);
  }
  throw ConfigError("model.name: unknown model '" + name + "' (expected stable-ou, tanh-well, free, custom)");
}

Perturbation build_perturbation(const ScenarioConfig& cfg) {
  const std::string& k = cfg.get_string("perturbation.K");
  const double c = cfg.get_double("perturbation.scale");
  std::optional<Perturbation> p;
  if (k == "inverse-quadratic") p = perturbations::inverse_quadratic(c);
  else if (k == "constant") p = perturbations::constant(c);
  else if (k == "none") p = perturbations::none();
  else if (k == "custom") {
    const std::string& expr = cfg.get_string("perturbation.K_expr");
    if (expr.empty()) throw ConfigError("perturbation.K_expr is required for a custom K");
    p = perturbations::custom(expr).scaled(c);
  } else {
    throw ConfigError("perturbation.K: unknown field '" + k + "' (expected inverse-quadratic, constant, none, custom)");
  }
  const std::string& f = cfg.get_string("perturbation.F");
  if (f == "step") return p->with_time_profile(perturbations::unit_step(), "step");
  if (f == "impulse") {
    return p->with_time_profile(perturbations::mollified_impulse(cfg.get_double("perturbation.impulse_center"),
                                                                 cfg.get_double("perturbation.impulse_width")),
                                "impulse");
  }
  throw ConfigError("perturbation.F: unknown profile '" + f + "' (expected step, impulse)");
}

std::vector<Observable> build_observables(const ScenarioConfig& cfg) {
  std::vector<Observable> out;
  for (const auto& name : cfg.get_strings("observables.names")) {
    if (name == "bump") {
      out.push_back(observables::bump(cfg.get_double("observables.bump_center"),
                                      cfg.get_double("observables.bump_half_width"),
                                      cfg.get_double("observables.bump_edge")));
      continue;
    }
    const auto names = observables::names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ConfigError("observables: unknown observable '" + name + "' (expected " + join(names) + ")");
    }
    out.push_back(observables::by_name(name));
  }
  if (out.empty()) throw ConfigError("observables: at least one observable is required");
  return out;
}

ResponseSpec build_response_spec(const ScenarioConfig& cfg) {
  ResponseSpec rs;
  rs.dt = cfg.get_double("response.sde_dt");
  rs.t_grid.dt = cfg.get_double("response.dt");
  rs.t_grid.t_max = cfg.get_double("response.t_max");
  rs.window = positive_size(cfg, "response.window");
  rs.diff_dt = cfg.get_double("response.diff_dt");
  rs.domain = parse_domain("response.domain", cfg.get_string("response.domain"));
  rs.half_width = cfg.get_double("grid.L");
  rs.n_blocks = positive_size(cfg, "ensemble.n_blocks");
  rs.threads = threads_of(cfg);
  rs.burn_in = cfg.get_double("integrator.burn_in");
  rs.thinning = cfg.get_double("integrator.thinning");
  return rs;
}

VerifyConfig build_verify_config(const ScenarioConfig& cfg) {
  VerifyConfig vc;
  vc.model = build_model(cfg);
  vc.scenario = cfg.get_string("verify.scenario").empty() ? vc.model.name() : cfg.get_string("verify.scenario");
  vc.perturbation = build_perturbation(cfg);
  const auto obs = build_observables(cfg);
  if (obs.size() != 1) throw ConfigError("verify takes exactly one observable");
  vc.observable = obs.front();
  vc.grid_half_width = cfg.get_double("grid.L");
  vc.grid_points = positive_size(cfg, "grid.n_points");
  vc.fp = build_fp_spec(cfg);
  vc.response = build_response_spec(cfg);
  vc.epsilons = cfg.get_doubles("perturbation.epsilons");
  vc.n_traj = positive_size(cfg, "response.n_traj");
  vc.seed = seed_of(cfg);
  vc.tolerances.sigma_multiple = cfg.get_double("tolerances.sigma_multiple");
  vc.tolerances.mc_pde_floor = cfg.get_double("tolerances.mc_pde_floor");
  vc.tolerances.direct_pde_floor = cfg.get_double("tolerances.direct_pde_floor");
  vc.check_t_lo = cfg.get_double("tolerances.t_lo");
  vc.check_t_hi = cfg.get_double("tolerances.t_hi");
  vc.flip_y_sign = cfg.get_bool("verify.flip_y_sign");
  return vc;
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, char** envp) {
  CLI::App app{"Levy-driven SDE response toolkit", "levyfdt"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string config_path, output_dir, method;
  std::optional<std::int64_t> seed;
  std::optional<std::int64_t> threads;
  bool defaults = false;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML scenario file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--output", output_dir, "output directory");
    sub->add_option("--threads", threads, "worker cap");
  };
  auto* simulate = app.add_subcommand("simulate", "ensemble of trajectories to CSV");
  auto* stationary = app.add_subcommand("stationary", "stationary density, Y, v, U and solve log");
  auto* response = app.add_subcommand("response", "response curve by one method or all");
  auto* verify = app.add_subcommand("verify", "four-route cross-validation report");
  auto* audit = app.add_subcommand("audit", "assumption audit");
  auto* config = app.add_subcommand("config", "print the canonical configuration");
  for (auto* s : {simulate, stationary, response, verify, audit, config}) add_common(s);
  response->add_option("--method", method, "direct, agarwal, seifert, semigroup or all");
  stationary->add_option("--method", method, "exponential-splitting or explicit-RK");
  config->add_flag("--defaults", defaults, "list every key with its default");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "levyfdt: " << e.what() << '\n';
    return kUsage;
  }

  WarningSink sink = [&err](const std::string& m) { err << "levyfdt: warning: " << m << '\n'; };
  set_warning_sink(sink);
  struct Restore {
    ~Restore() { set_warning_sink({}); }
  } restore;

  try {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig() : ScenarioConfig::from_file(config_path);
    cfg.apply_environment(envp);
    if (seed) cfg.set("ensemble.master_seed", *seed);
    if (threads) cfg.set("ensemble.threads", *threads);
    if (!output_dir.empty()) cfg.set("output.directory", output_dir);
    if (!method.empty()) {
      if (response->parsed()) cfg.set("response.method", method);
      if (stationary->parsed()) cfg.set("solver.method", method);
    }
    if (simulate->parsed()) return cmd_simulate(cfg, out);
    if (stationary->parsed()) return cmd_stationary(cfg, out, err);
    if (response->parsed()) return cmd_response(cfg, out);
    if (verify->parsed()) return cmd_verify(cfg, out, err);
    if (audit->parsed()) return cmd_audit(cfg, out);
    return cmd_config(cfg, out, defaults);
  } catch (const ConfigError& e) {
    err << "levyfdt: config error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "levyfdt: invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "levyfdt: numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "levyfdt: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace levyfdt::cli
