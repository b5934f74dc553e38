#include "levyfdt/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "levyfdt/errors.hpp"

#ifndef LEVYFDT_VERSION
#define LEVYFDT_VERSION "0.0.0"
#endif

namespace levyfdt {

using nlohmann::ordered_json;

const char* version() { return LEVYFDT_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_provenance(std::ostream& os, const Provenance& prov) {
  os << "# levyfdt " << version() << '\n';
  os << "# config_hash: " << prov.config_hash << '\n';
  os << "# seed: " << prov.seed << '\n';
  for (const auto& [k, v] : prov.extra) os << "# " << k << ": " << v << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw ConfigError("not a number: '" + s + "'");
  }
  return v;
}

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

ordered_json numbers(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

ordered_json provenance_json(const Provenance& prov) {
  ordered_json j;
  j["version"] = version();
  j["config_hash"] = prov.config_hash;
  j["seed"] = prov.seed;
  for (const auto& [k, v] : prov.extra) j[k] = v;
  return j;
}

ordered_json log_json(const SolveLog& log) {
  ordered_json j;
  j["method"] = log.method;
  j["residual_times"] = numbers(log.residual_times);
  j["residual_history"] = numbers(log.residual_history);
  j["warm_time"] = number(log.warm_time);
  j["final_residual"] = number(log.final_residual);
  j["boundary_mass"] = number(log.boundary_mass);
  j["boundary_mass_limit"] = number(log.boundary_mass_limit);
  j["confining"] = log.confining;
  j["clamp_min"] = number(log.clamp_min);
  j["clamped_points"] = log.clamped_points;
  j["rcond"] = number(log.rcond);
  j["warnings"] = log.warnings;
  return j;
}

ordered_json check_json(const PairwiseCheck& c) {
  return {{"a", c.a},
          {"b", c.b},
          {"sup_diff", number(c.sup_diff)},
          {"tol", number(c.tol)},
          {"worst_t", number(c.worst_t)},
          {"pass", c.pass}};
}

}  // namespace

void write_grid_field(std::ostream& os, const GridField& f, const Provenance& prov,
                      const std::string& column) {
  write_provenance(os, prov);
  os << "# grid: L=" << format_double(f.grid().half_width()) << " n=" << f.grid().size()
     << " kind=" << to_string(f.kind()) << '\n';
  os << "x," << column << '\n';
  for (std::size_t i = 0; i < f.size(); ++i) {
    os << format_double(f.grid().x(i)) << ',' << format_double(f[i]) << '\n';
  }
}

GridField read_grid_field(std::istream& is) {
  std::string line;
  double L = 0.0;
  std::size_t n = 0;
  FieldKind kind = FieldKind::generic;
  bool header = false;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("grid:");
      if (pos == std::string::npos) continue;
      std::istringstream ss(line.substr(pos + 5));
      std::string tok;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "L") L = parse_double(val);
        if (key == "n") n = static_cast<std::size_t>(std::stoull(val));
        if (key == "kind") {
          kind = val == "density" ? FieldKind::density
                 : val == "observable" ? FieldKind::observable
                                       : FieldKind::generic;
        }
      }
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    const auto cols = split(line);
    if (cols.size() != 2) throw ConfigError("grid field row needs 2 columns: '" + line + "'");
    values.push_back(parse_double(cols[1]));
  }
  if (n == 0 || !(L > 0.0)) throw ConfigError("grid field file has no grid header");
  if (values.size() != n) throw ConfigError("grid field file row count does not match its header");
  return GridField(Grid1D(L, n), std::move(values), kind);
}

void write_response_curve(std::ostream& os, const ResponseCurve& c, const Provenance& prov) {
  write_provenance(os, prov);
  if (!c.observable_name.empty()) os << "# observable: " << c.observable_name << '\n';
  if (!c.perturbation_name.empty()) os << "# perturbation: " << c.perturbation_name << '\n';
  for (const auto& n : c.notes) os << "# note: " << n << '\n';
  os << "t,value,stderr,method\n";
  const char* m = to_string(c.method);
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    os << format_double(c.times[i]) << ',' << format_double(c.values[i]) << ','
       << format_double(c.stderr_[i]) << ',' << m << '\n';
  }
}

ResponseCurve read_response_curve(std::istream& is) {
  ResponseCurve c;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# observable: ", 0) == 0) c.observable_name = line.substr(14);
      if (line.rfind("# perturbation: ", 0) == 0) c.perturbation_name = line.substr(16);
      if (line.rfind("# note: ", 0) == 0) c.notes.push_back(line.substr(8));
      continue;
    }
    if (!header) {
      if (line != "t,value,stderr,method") throw ConfigError("unexpected response curve header: " + line);
      header = true;
      continue;
    }
    const auto cols = split(line);
    if (cols.size() != 4) throw ConfigError("response curve row needs 4 columns: '" + line + "'");
    c.times.push_back(parse_double(cols[0]));
    c.values.push_back(parse_double(cols[1]));
    c.stderr_.push_back(parse_double(cols[2]));
    c.method = parse_response_method(cols[3]);
  }
  c.validate();
  return c;
}

void write_ensemble(std::ostream& os, const EnsembleResult& r, const Provenance& prov) {
  write_provenance(os, prov);
  os << "# model: " << r.model_name << '\n';
  os << "# n_traj: " << r.n_traj << '\n';
  os << "# n_flagged: " << r.n_flagged << '\n';
  os << "# ensemble_seed: " << r.seed << '\n';
  if (r.warning) os << "# warning: " << *r.warning << '\n';
  os << 't';
  for (const auto& n : r.observable_names) os << ",O_" << n << "_mean";
  for (const auto& n : r.observable_names) os << ",O_" << n << "_stderr";
  os << '\n';
  for (std::size_t t = 0; t < r.times.size(); ++t) {
    os << format_double(r.times[t]);
    for (const auto& m : r.observable_mean) os << ',' << format_double(m[t]);
    for (const auto& s : r.stderr_) os << ',' << format_double(s[t]);
    os << '\n';
  }
}

void write_trajectory(std::ostream& os, const Trajectory& tr, const Provenance& prov) {
  write_provenance(os, prov);
  if (tr.flagged) os << "# flagged at step " << tr.flag_step << '\n';
  os << 't';
  if (tr.dim == 1) {
    os << ",x";
  } else {
    for (int d = 1; d <= tr.dim; ++d) os << ",x" << d;
  }
  os << '\n';
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    os << format_double(tr.times[i]);
    for (double v : tr.state(i)) os << ',' << format_double(v);
    os << '\n';
  }
}

std::string solve_log_json(const SolveLog& log, const Provenance& prov) {
  ordered_json j;
  j["schema"] = 1;
  j["provenance"] = provenance_json(prov);
  j["solve_log"] = log_json(log);
  return j.dump(2) + "\n";
}

std::string pairwise_json(const std::vector<PairwiseCheck>& checks, const Provenance& prov) {
  ordered_json j;
  j["schema"] = 1;
  j["provenance"] = provenance_json(prov);
  ordered_json a = ordered_json::array();
  for (const auto& c : checks) a.push_back(check_json(c));
  j["pairwise_checks"] = a;
  bool pass = true;
  for (const auto& c : checks) pass = pass && c.pass;
  j["pass"] = pass;
  return j.dump(2) + "\n";
}

std::string verify_report_json(const VerifyReport& rep, const Provenance& prov) {
  ordered_json j;
  j["schema"] = 1;
  j["scenario"] = rep.scenario;
  j["provenance"] = provenance_json(prov);
  ordered_json seeds = ordered_json::object();
  for (const auto& [k, v] : rep.seeds) seeds[k] = v;
  j["seeds"] = seeds;
  ordered_json curves = ordered_json::array();
  for (const auto& c : rep.curves) {
    curves.push_back({{"method", to_string(c.method)},
                      {"observable", c.observable_name},
                      {"perturbation", c.perturbation_name},
                      {"t", numbers(c.times)},
                      {"value", numbers(c.values)},
                      {"stderr", numbers(c.stderr_)},
                      {"notes", c.notes}});
  }
  j["curves"] = curves;
  ordered_json checks = ordered_json::array();
  for (const auto& c : rep.checks) checks.push_back(check_json(c));
  j["pairwise_checks"] = checks;
  if (rep.linearity) {
    const auto& l = *rep.linearity;
    j["linearity"] = {{"epsilons", numbers(l.epsilons)},
                      {"median_order", numbers(l.median_order)},
                      {"t_max", number(l.t_max)},
                      {"monotone", l.monotone},
                      {"notes", l.notes}};
  } else {
    j["linearity"] = nullptr;
  }
  j["r0_quadrature"] = number(rep.r0_quadrature);
  j["stationary"] = log_json(rep.stationary_log);
  j["warnings"] = rep.warnings;
  j["runtime_seconds"] = number(rep.runtime_seconds);
  j["pass"] = rep.pass;
  j["failure"] = rep.failure ? ordered_json(*rep.failure) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string audit_json(const AssumptionAudit& a, const std::string& model_name,
                       const Provenance& prov) {
  ordered_json j;
  j["schema"] = 1;
  j["provenance"] = provenance_json(prov);
  j["model"] = model_name;
  j["probe"] = {{"half_width", number(a.probe.half_width)},
                {"samples", a.probe.samples},
                {"holder_beta", number(a.probe.holder_beta)}};
  j["holder"] = {{"beta", number(a.holder.beta)},
                 {"drift_max_ratio", number(a.holder.drift_max_ratio)},
                 {"diffusion_max_ratio", number(a.holder.diffusion_max_ratio)},
                 {"pairs", a.holder.pairs}};
  j["ellipticity_lambda"] = number(a.ellipticity_lambda);
  j["bounds"] = {{"drift_sup", number(a.bounds.drift_sup)},
                 {"drift_divergence_sup", number(a.bounds.drift_divergence_sup)},
                 {"diffusion_gradient_sup", number(a.bounds.diffusion_gradient_sup)},
                 {"inverse_diffusion_gradient_sup", number(a.bounds.inverse_diffusion_gradient_sup)}};
  const auto& d = a.dissipativity;
  j["dissipativity"] = {{"k1", number(d.k1)},
                        {"c1", number(d.c1)},
                        {"c_alpha", number(d.moments.c_alpha)},
                        {"small_jump_second", number(d.moments.small_jump_second)},
                        {"large_jump_first", number(d.moments.large_jump_first)},
                        {"near_origin_worst", number(d.near_origin_worst)},
                        {"annulus_probes", d.annulus_probes},
                        {"verdict", to_string(d.verdict)}};
  j["seed"] = a.seed;
  return j.dump(2) + "\n";
}

}  // namespace levyfdt
