#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "levyfdt/errors.hpp"

namespace levyfdt::cli {

namespace {

using Strings = std::vector<std::string>;
using Doubles = std::vector<double>;

}  // namespace

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = {
      {"model.name", std::string("tanh-well"), "stable-ou, tanh-well, free or custom"},
      {"model.alpha", 1.5, "stability index in (1, 2)"},
      {"model.sigma", 1.0, "constant noise amplitude (built-ins)"},
      {"model.a", 2.0, "tanh-well depth: b = -a x / sqrt(1 + x^2)"},
      {"model.lambda", 1.0, "stable-ou rate: b = -lambda x"},
      {"model.drift", std::string(""), "custom drift expression in x"},
      {"model.diffusion", std::string("1"), "custom noise amplitude expression in x"},
      {"grid.L", 32.0, "half width of the periodic grid [-L, L)"},
      {"grid.n_points", std::int64_t{2048}, "grid points (power of two >= 64)"},
      {"integrator.dt", 1e-3, "SDE step"},
      {"integrator.t_max", 10.0, "simulate horizon"},
      {"integrator.save_every", 0.1, "spacing of saved times"},
      {"integrator.burn_in", 20.0, "steady-state burn-in time"},
      {"integrator.thinning", 0.2, "time between retained steady-state samples"},
      {"integrator.domain", std::string("whole-line"), "whole-line or periodic (simulate only)"},
      {"ensemble.n_traj", std::int64_t{10000}, "trajectories for simulate"},
      {"ensemble.master_seed", std::int64_t{20240601}, "master seed of every random stream"},
      {"ensemble.threads", std::int64_t{0}, "worker cap (0 = hardware); results do not depend on it"},
      {"ensemble.n_blocks", std::int64_t{64}, "trajectory blocks for batch means"},
      {"ensemble.x0", 0.0, "initial state for initial = fixed"},
      {"ensemble.initial", std::string("fixed"), "fixed or stationary"},
      {"ensemble.trajectories", std::int64_t{0}, "single trajectories dumped by simulate"},
      {"perturbation.K", std::string("inverse-quadratic"), "inverse-quadratic, constant, none or custom"},
      {"perturbation.scale", 1.0, "multiplier c of K"},
      {"perturbation.K_expr", std::string(""), "custom K expression in x"},
      {"perturbation.F", std::string("step"), "step or impulse (simulate with a drive)"},
      {"perturbation.impulse_center", 0.5, "impulse centre"},
      {"perturbation.impulse_width", 0.05, "impulse width"},
      {"perturbation.epsilons", Doubles{0.1, 0.05}, "strictly decreasing epsilon list"},
      {"perturbation.drive_epsilon", 0.0, "epsilon of the drive applied by simulate (0 = none)"},
      {"observables.names", Strings{"tanh"}, "constant, tanh, x, rational, bump, moment"},
      {"observables.bump_center", 0.0, "bump centre"},
      {"observables.bump_half_width", 1.0, "bump half width"},
      {"observables.bump_edge", 0.2, "bump edge width"},
      {"response.dt", 0.1, "response time grid spacing"},
      {"response.t_max", 5.0, "response horizon"},
      {"response.window", std::int64_t{5}, "differencing window in points (odd)"},
      {"response.diff_dt", 0.02, "spacing of the differencing grid (divides response.dt)"},
      {"response.n_traj", std::int64_t{200000}, "trajectories per Monte Carlo route"},
      {"response.domain", std::string("periodic"), "periodic or whole-line"},
      {"response.method", std::string("semigroup"), "direct, agarwal, seifert, semigroup or all"},
      {"response.sde_dt", 1e-3, "SDE step of the Monte Carlo routes"},
      {"solver.dt", 1e-3, "Fokker-Planck step"},
      {"solver.method", std::string("exponential-splitting"), "exponential-splitting or explicit-RK"},
      {"solver.stop_tol", 1e-7, "stationary residual target"},
      {"solver.warm_time", 10.0, "maximum evolution time before the linear correction"},
      {"solver.check_interval", 1.0, "residual sampling period"},
      {"solver.boundary_mass_limit", 1e-2, "allowed mass on |x| >= 0.75 L"},
      {"solver.stability_number", 1.5, "explicit substep bound"},
      {"tolerances.sigma_multiple", 3.0, "stderr multiple of the pairwise checks"},
      {"tolerances.mc_pde_floor", 2e-2, "absolute floor of Monte Carlo vs PDE checks"},
      {"tolerances.direct_pde_floor", 3e-2, "absolute floor of direct vs PDE check"},
      {"tolerances.t_lo", 0.0, "start of the checked time window"},
      {"tolerances.t_hi", 5.0, "end of the checked time window"},
      {"verify.scenario", std::string(""), "report label (default: model name)"},
      {"verify.flip_y_sign", false, "negative control: negate Y"},
      {"audit.half_width", 50.0, "probe box half width"},
      {"audit.samples", std::int64_t{20000}, "probe points"},
      {"audit.holder_beta", 0.75, "Holder exponent tested"},
      {"output.directory", std::string("out"), "output directory"},
      {"output.formats", Strings{"csv", "json"}, "subset of csv, json"},
  };
  return keys;
}

namespace {

const KeySpec* find_key(const std::string& path) {
  for (const auto& k : schema()) {
    if (k.path == path) return &k;
  }
  return nullptr;
}

bool section_has(const std::string& section, const std::string& key) {
  return find_key(section + "." + key) != nullptr;
}

double text_to_double(const std::string& path, const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc{} || r.ptr != e) throw ConfigError(path + ": expected a number, got '" + s + "'");
  return v;
}

std::int64_t text_to_int(const std::string& path, const std::string& s) {
  std::int64_t v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc{} || r.ptr != e) throw ConfigError(path + ": expected an integer, got '" + s + "'");
  return v;
}

bool text_to_bool(const std::string& path, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(path + ": expected true or false, got '" + s + "'");
}

std::vector<std::string> split_list(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '[' || c == ']' || c == ' '; }),
          s.end());
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

Value convert_text(const KeySpec& spec, const std::string& text) {
  return std::visit(
      [&](const auto& fallback) -> Value {
        using T = std::decay_t<decltype(fallback)>;
        if constexpr (std::is_same_v<T, bool>) return text_to_bool(spec.path, text);
        if constexpr (std::is_same_v<T, std::int64_t>) return text_to_int(spec.path, text);
        if constexpr (std::is_same_v<T, double>) return text_to_double(spec.path, text);
        if constexpr (std::is_same_v<T, std::string>) return text;
        if constexpr (std::is_same_v<T, Doubles>) {
          Doubles v;
          for (const auto& t : split_list(text)) v.push_back(text_to_double(spec.path, t));
          return v;
        }
        if constexpr (std::is_same_v<T, Strings>) return split_list(text);
      },
      spec.fallback);
}

Value convert_node(const KeySpec& spec, const YAML::Node& node) {
  if (std::holds_alternative<Doubles>(spec.fallback) || std::holds_alternative<Strings>(spec.fallback)) {
    std::vector<std::string> items;
    if (node.IsSequence()) {
      for (const auto& n : node) {
        if (!n.IsScalar()) throw ConfigError(spec.path + ": list entries must be scalars");
        items.push_back(n.Scalar());
      }
    } else if (node.IsScalar()) {
      items = split_list(node.Scalar());
    } else {
      throw ConfigError(spec.path + ": expected a list");
    }
    if (std::holds_alternative<Strings>(spec.fallback)) return items;
    Doubles d;
    for (const auto& s : items) d.push_back(text_to_double(spec.path, s));
    return d;
  }
  if (!node.IsScalar()) throw ConfigError(spec.path + ": expected a scalar value");
  return convert_text(spec, node.Scalar());
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

ScenarioConfig::ScenarioConfig() {
  for (const auto& k : schema()) values_[k.path] = k.fallback;
}

ScenarioConfig ScenarioConfig::from_yaml(const std::string& text, const std::string& origin) {
  ScenarioConfig cfg;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!root || root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError(origin + ": top level must be a mapping");
  for (const auto& sec : root) {
    const std::string section = sec.first.as<std::string>();
    const YAML::Node& body = sec.second;
    if (body.IsMap()) {
      for (const auto& kv : body) {
        const std::string path = section + "." + kv.first.as<std::string>();
        const KeySpec* spec = find_key(path);
        if (spec == nullptr) throw ConfigError(origin + ": unknown key '" + path + "'");
        cfg.values_[path] = convert_node(*spec, kv.second);
        cfg.file_set_[path] = true;
      }
      continue;
    }
    // Shorthand: `model: tanh-well`, `observables: [tanh, x]`.
    std::string path;
    if (section_has(section, "name")) path = section + ".name";
    if (section_has(section, "names")) path = section + ".names";
    if (path.empty()) throw ConfigError(origin + ": unknown key '" + section + "'");
    cfg.values_[path] = convert_node(*find_key(path), body);
    cfg.file_set_[path] = true;
  }
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_yaml(ss.str(), path);
}

void ScenarioConfig::apply_environment(char** envp) {
  if (envp == nullptr) return;
  for (char** e = envp; *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind("LEVYFDT_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(8, eq - 8);
    const std::string text = entry.substr(eq + 1);
    const auto sep = name.find("__");
    if (sep == std::string::npos) continue;
    const KeySpec* match = nullptr;
    for (const auto& k : schema()) {
      const auto dot = k.path.find('.');
      if (upper(k.path.substr(0, dot)) == name.substr(0, sep) &&
          upper(k.path.substr(dot + 1)) == name.substr(sep + 2)) {
        match = &k;
      }
    }
    if (match == nullptr) throw ConfigError("unknown environment override '" + entry.substr(0, eq) + "'");
    if (explicitly_set(match->path)) continue;
    values_[match->path] = convert_text(*match, text);
  }
}

void ScenarioConfig::set_text(const std::string& path, const std::string& text) {
  const KeySpec* spec = find_key(path);
  if (spec == nullptr) throw ConfigError("unknown key '" + path + "'");
  values_[path] = convert_text(*spec, text);
  file_set_[path] = true;
}

void ScenarioConfig::set(const std::string& path, Value v) {
  const KeySpec* spec = find_key(path);
  if (spec == nullptr) throw ConfigError("unknown key '" + path + "'");
  if (v.index() != spec->fallback.index()) throw ConfigError(path + ": wrong value type");
  values_[path] = std::move(v);
  file_set_[path] = true;
}

bool ScenarioConfig::explicitly_set(const std::string& path) const { return file_set_.count(path) > 0; }

const Value& ScenarioConfig::at(const std::string& path) const {
  const auto it = values_.find(path);
  if (it == values_.end()) throw ConfigError("unknown key '" + path + "'");
  return it->second;
}

bool ScenarioConfig::get_bool(const std::string& p) const { return std::get<bool>(at(p)); }
std::int64_t ScenarioConfig::get_int(const std::string& p) const { return std::get<std::int64_t>(at(p)); }
double ScenarioConfig::get_double(const std::string& p) const { return std::get<double>(at(p)); }
const std::string& ScenarioConfig::get_string(const std::string& p) const {
  return std::get<std::string>(at(p));
}
const std::vector<double>& ScenarioConfig::get_doubles(const std::string& p) const {
  return std::get<Doubles>(at(p));
}
const std::vector<std::string>& ScenarioConfig::get_strings(const std::string& p) const {
  return std::get<Strings>(at(p));
}

std::string ScenarioConfig::canonical() const {
  nlohmann::json j = nlohmann::json::object();  // std::map keys: sorted
  for (const auto& [path, v] : values_) {
    const auto dot = path.find('.');
    auto& slot = j[path.substr(0, dot)][path.substr(dot + 1)];
    std::visit([&](const auto& x) { slot = x; }, v);
  }
  return j.dump();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ScenarioConfig::hash() const {
  // Keys that cannot change any result stay out of the hash.
  ScenarioConfig scenario = *this;
  scenario.values_.erase("output.directory");
  scenario.values_.erase("ensemble.threads");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(scenario.canonical())));
  return buf;
}

}  // namespace levyfdt::cli
