#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace levyfdt::cli {

using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<double>,
                           std::vector<std::string>>;

/// One configurable key: dotted path, default, and a short description.
struct KeySpec {
  std::string path;
  Value fallback;
  std::string help;
};

/// Every key with its default. The table is the documentation of the format.
const std::vector<KeySpec>& schema();

/// Resolved configuration: defaults < environment < file < command line.
class ScenarioConfig {
 public:
  ScenarioConfig();

  /// Parse YAML text; unknown keys and type mismatches throw ConfigError.
  static ScenarioConfig from_yaml(const std::string& text, const std::string& origin = "<string>");
  static ScenarioConfig from_file(const std::string& path);

  /// Apply LEVYFDT_<SECTION>__<KEY> variables (upper case) that the file did not set.
  void apply_environment(char** envp);

  /// Set a key from its textual form (used by flags and the environment).
  void set_text(const std::string& path, const std::string& text);
  void set(const std::string& path, Value v);
  bool explicitly_set(const std::string& path) const;

  bool get_bool(const std::string& path) const;
  std::int64_t get_int(const std::string& path) const;
  double get_double(const std::string& path) const;
  const std::string& get_string(const std::string& path) const;
  const std::vector<double>& get_doubles(const std::string& path) const;
  const std::vector<std::string>& get_strings(const std::string& path) const;

  /// Nested JSON with sorted keys and every value resolved; valid YAML, so it
  /// loads back to the same configuration.
  std::string canonical() const;
  /// FNV-1a 64 of canonical() without output.directory and ensemble.threads,
  /// as 16 hex digits.
  std::string hash() const;

 private:
  const Value& at(const std::string& path) const;
  std::map<std::string, Value> values_;
  std::map<std::string, bool> file_set_;
};

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace levyfdt::cli
