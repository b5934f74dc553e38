#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levyfdt/errors.hpp"
#include "levyfdt/grid.hpp"
#include "levyfdt/model.hpp"
#include "levyfdt/simulate.hpp"

namespace levyfdt {

enum class FpMethod {
  exponential_splitting,  ///< exact fractional multiplier, explicit drift stages (exponential RK4)
  explicit_rk,            ///< classical RK4 on the full operator
};

const char* to_string(FpMethod m);
FpMethod parse_fp_method(const std::string& s);

struct FpSolveSpec {
  double dt = 1e-3;
  double t_end = 5.0;
  FpMethod method = FpMethod::exponential_splitting;
  double stop_tol = 1e-7;            ///< on ||A* p||_1 / ||p||_1
  double warm_time = 10.0;           ///< cap on the evolution before the linear solve
  double check_interval = 1.0;       ///< residual sampling period during warm-up
  double boundary_mass_limit = 1e-2; ///< mass allowed in the boundary band
  double stability_number = 1.5;     ///< bound on (explicit spectral radius) x substep

  void validate() const;
};

/// Density snapshots and bookkeeping from one evolution run.
struct Evolution {
  std::vector<double> times;
  std::vector<GridField> snapshots;
  FpMethod method_used = FpMethod::exponential_splitting;
  std::size_t substeps = 1;        ///< internal steps per dt
  double max_step_mass_change = 0.0;  ///< relative to the initial L1 norm
  double clamp_min = 0.0;          ///< most negative pre-clamp snapshot value
  std::size_t clamped_points = 0;
};

/// Time stepper for dp/dt = A* p - eps F(t) (K p)'.
class Propagator {
 public:
  Propagator(const SdeModel& model, const Grid1D& grid, const FpSolveSpec& spec,
             std::optional<Drive> drive = std::nullopt);
  ~Propagator();
  Propagator(Propagator&&) noexcept;
  Propagator& operator=(Propagator&&) noexcept;

  /// Advance p from time t to t + spec.dt.
  void step(std::vector<double>& p, double t) const;
  std::size_t substeps() const;
  FpMethod method() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Snapshots every `snapshot_every` time units (0 = start and end only).
/// Densities are clamped and renormalized in the snapshots only; the internal
/// state is left untouched so the evolution stays linear.
Evolution evolve_density(const SdeModel& model, const GridField& p0, const FpSolveSpec& spec,
                         std::optional<Drive> drive = std::nullopt, double snapshot_every = 0.0);

/// Same evolution for a signed field (no clamping, no normalization).
Evolution evolve_signed(const SdeModel& model, const GridField& g0, const FpSolveSpec& spec,
                        double snapshot_every = 0.0);

/// ||A* p||_1 / ||p||_1.
double stationary_residual(const SdeModel& model, const GridField& p);

/// Boundary band |x| >= kBoundaryBand * L. Jumps wrap around the periodic
/// cell, so heavy-tailed densities load this band well before L is too small
/// for the bulk.
inline constexpr double kBoundaryBand = 0.75;

/// Mass in the boundary band.
double boundary_mass(const GridField& p);

/// Dense discrete A* with one row replaced by the mass functional h 1^T,
/// factorized once and shared by the stationary and conjugate solves.
class AdjointSystem {
 public:
  AdjointSystem(const SdeModel& model, const Grid1D& grid);

  const Grid1D& grid() const;
  /// Reciprocal condition estimate of the bordered matrix.
  double rcond() const;
  /// Solve A* x = rhs on every row but the replaced one, and mass(x) = mass.
  std::vector<double> solve(std::span<const double> rhs, double mass) const;
  /// Dense product A* x (unbordered).
  std::vector<double> apply(std::span<const double> x) const;

  /// rcond floor below which the null space is not one-dimensional.
  static constexpr double kSingularRcond = 1e-13;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct SolveLog {
  std::vector<double> residual_times;
  std::vector<double> residual_history;
  double warm_time = 0.0;
  double final_residual = 0.0;
  double boundary_mass = 0.0;
  double boundary_mass_limit = 0.0;
  bool confining = true;
  double clamp_min = 0.0;
  std::size_t clamped_points = 0;
  double rcond = 0.0;
  std::string method;
  std::vector<std::string> warnings;
};

/// Thrown by solve_stationary; carries the log for diagnostics.
class SolveFailure : public NumericalError {
 public:
  SolveFailure(const std::string& what, SolveLog log) : NumericalError(what), log_(std::move(log)) {}
  const SolveLog& log() const { return log_; }

 private:
  SolveLog log_;
};

struct StationaryResult {
  GridField density;
  SolveLog log;
};

/// Evolve from a broad Gaussian until the residual stalls, then correct with
/// one bordered linear solve. A boundary-mass breach is an error for models
/// whose drift points inward at the edges and a logged warning otherwise
/// (a non-confining drift has the uniform density as its periodic answer).
StationaryResult solve_stationary(const SdeModel& model, const Grid1D& grid,
                                  const FpSolveSpec& spec = {});

/// Positivity floor for divisions by p_ss, relative to max p_ss.
inline constexpr double kPositivityFloor = 1e-3;
/// Largest share of stationary mass allowed on floored cells.
inline constexpr double kMaxFlooredShare = 0.05;

/// L* p = -(K p)'.
GridField perturbation_adjoint(const Perturbation& perturbation, const GridField& p);

/// v - mass(v) p_ss / mass(p_ss).
GridField gauge_mass_zero(const GridField& v, const GridField& p_ss);

struct FloorInfo {
  double floor = 0.0;
  std::vector<bool> floored;
  std::size_t count = 0;
  double mass_share = 0.0;  ///< stationary mass on floored cells
};

FloorInfo positivity_floor(const GridField& p_ss);

struct ConjugateSolution {
  GridField v;
  GridField U;
  double residual = 0.0;           ///< ||A* v - L* p||_1 / ||L* p||_1 (0 when L* p = 0)
  double absolute_residual = 0.0;
  double compatibility_mass = 0.0; ///< mass of L* p_ss
  FloorInfo floor;
  std::string gauge = "mass-zero";
};

inline constexpr double kCompatibilityTol = 1e-8;

ConjugateSolution solve_conjugate(const AdjointSystem& system, const GridField& p_ss,
                                  const Perturbation& perturbation, double residual_tol = 1e-6);
ConjugateSolution solve_conjugate(const SdeModel& model, const GridField& p_ss,
                                  const Perturbation& perturbation, double residual_tol = 1e-6);

struct AgarwalObservable {
  GridField Y;
  FloorInfo floor;
  double construction_check = 0.0;  ///< h sum over cells of Y p (unfloored) or -(Kp)' (floored)
  double floor_bias = 0.0;          ///< h sum over floored cells of (Y p + (Kp)')
};

/// Y = -(K p_ss)' / p_ss with the positivity floor on the denominator.
AgarwalObservable agarwal_observable(const GridField& p_ss, const Perturbation& perturbation);

}  // namespace levyfdt
