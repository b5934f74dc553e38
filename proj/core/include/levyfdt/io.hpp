#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "levyfdt/fokker_planck.hpp"
#include "levyfdt/grid.hpp"
#include "levyfdt/model.hpp"
#include "levyfdt/response.hpp"
#include "levyfdt/simulate.hpp"

namespace levyfdt {

/// Library version string.
const char* version();

/// Comment lines written at the top of every output file.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;
};

/// "# levyfdt <version>", "# config_hash: ...", "# seed: ...", then extras.
void write_provenance(std::ostream& os, const Provenance& prov);

/// Shortest round-tripping decimal form ("%.17g" trimmed).
std::string format_double(double v);

/// CSV with a "# grid: L=<L> n=<n> kind=<kind>" line and columns x,<column>.
void write_grid_field(std::ostream& os, const GridField& f, const Provenance& prov,
                      const std::string& column = "value");
/// Parse a file written by write_grid_field. Throws ConfigError on malformed input.
GridField read_grid_field(std::istream& is);

/// Columns t,value,stderr,method.
void write_response_curve(std::ostream& os, const ResponseCurve& c, const Provenance& prov);
ResponseCurve read_response_curve(std::istream& is);

/// Columns t, O_<name>_mean for each observable, then O_<name>_stderr.
void write_ensemble(std::ostream& os, const EnsembleResult& r, const Provenance& prov);

/// Columns t, x (or x1..xn).
void write_trajectory(std::ostream& os, const Trajectory& tr, const Provenance& prov);

/// JSON documents (schema 1). Returned as text so the JSON library stays private.
std::string solve_log_json(const SolveLog& log, const Provenance& prov);
std::string verify_report_json(const VerifyReport& rep, const Provenance& prov);
std::string audit_json(const AssumptionAudit& audit, const std::string& model_name,
                       const Provenance& prov);
std::string pairwise_json(const std::vector<PairwiseCheck>& checks, const Provenance& prov);

}  // namespace levyfdt
