#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levyfdt/fokker_planck.hpp"
#include "levyfdt/grid.hpp"
#include "levyfdt/model.hpp"
#include "levyfdt/simulate.hpp"

namespace levyfdt {

enum class ResponseMethod { direct, agarwal, seifert, semigroup };

const char* to_string(ResponseMethod m);
ResponseMethod parse_response_method(const std::string& s);
std::vector<std::string> response_method_names();

struct ResponseCurve {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> stderr_;  ///< MC standard error, or a dt-refinement estimate (semigroup)
  ResponseMethod method = ResponseMethod::direct;
  std::string observable_name;
  std::string perturbation_name;
  std::vector<std::string> notes;

  void validate() const;
};

/// Uniform response time grid 0, dt, ..., t_max.
struct TimeGrid {
  double dt = 0.1;
  double t_max = 5.0;
  std::size_t size() const;
  std::vector<double> points() const;
};

/// Least-squares quadratic derivative weights on a window of `window` points
/// (odd, >= 3). Interior points use the centred window; the first and last
/// half-window points use the nearest full window. Row i holds the weights
/// for output i as (offset, weight) pairs.
class DifferenceStencil {
 public:
  DifferenceStencil(std::size_t n_points, double dt, std::size_t window = 5);

  std::size_t size() const { return rows_.size(); }
  std::size_t window() const { return window_; }

  /// Apply as sum_k w_k (y_{i+k} - y_i); constants map to exactly 0.
  std::vector<double> apply(std::span<const double> y) const;
  /// Weight of input j in output i.
  double weight(std::size_t i, std::size_t j) const;

 private:
  std::size_t window_;
  std::vector<std::vector<std::pair<std::ptrdiff_t, double>>> rows_;
};

/// Settings shared by the Monte Carlo estimators.
struct ResponseSpec {
  double dt = 1e-3;                  ///< SDE step
  TimeGrid t_grid{};
  std::size_t window = 5;            ///< differencing window (points)
  double diff_dt = 0.02;             ///< spacing of the differencing grid; divides t_grid.dt
  Domain domain = Domain::periodic;  ///< matches the periodic grid of the PDE routes
  double half_width = 32.0;
  std::size_t n_blocks = 64;
  unsigned threads = 0;
  double burn_in = 20.0;
  double thinning = 0.2;
  std::size_t n_chains = 0;
};

struct LinearityReport {
  std::vector<double> epsilons;
  std::vector<double> times;
  /// [pair][time]: eps_j (Delta_j - Delta_{j+1}), the second-order remainder.
  std::vector<std::vector<double>> remainders;
  /// [pair][time]: log(|rho_j| / |rho_{j+1}|) / log(eps_j / eps_{j+1}).
  std::vector<std::vector<double>> orders;
  std::vector<double> median_order;  ///< per consecutive remainder pair over (0, t_max]
  double t_max = 3.0;
  bool monotone = true;              ///< |rho| decreases with eps at most times
  std::vector<std::string> notes;
};

struct DirectResult {
  ResponseCurve curve;                       ///< Richardson-extrapolated R
  std::vector<ResponseCurve> per_epsilon;    ///< R for each epsilon
  std::vector<std::vector<double>> delta;    ///< [eps][time] integrated response Delta
  LinearityReport linearity;
  std::size_t n_flagged = 0;
  std::vector<std::string> warnings;
};

/// Initial states for the stationary ensembles.
std::vector<double> stationary_initial_states(const SdeModel& model, const ResponseSpec& spec,
                                              std::size_t n, std::uint64_t seed);

/// Step-forced finite-epsilon response with common random numbers.
DirectResult response_direct(const SdeModel& model, const Perturbation& perturbation,
                             const Observable& observable, std::span<const double> epsilons,
                             std::size_t n_traj, const ResponseSpec& spec,
                             std::uint64_t master_seed, double linearity_t_max = 3.0);

/// E[O(X_t) Y(X_0)] over a stationary ensemble.
ResponseCurve response_agarwal(const SdeModel& model, const GridField& Y,
                               const Observable& observable, std::size_t n_traj,
                               const ResponseSpec& spec, std::uint64_t master_seed,
                               const std::string& perturbation_name = "");

/// d/dt E[O(X_t) U(X_0)] over a stationary ensemble.
ResponseCurve response_seifert(const SdeModel& model, const GridField& U,
                               const Observable& observable, std::size_t n_traj,
                               const ResponseSpec& spec, std::uint64_t master_seed,
                               const std::string& perturbation_name = "");

/// Correlation C(t) = E[O(X_t) W(X_0)] on the differencing grid (spacing
/// diff_dt) with batch-means errors; shared by the two stationary estimators.
struct Correlation {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> stderr_;
  std::vector<double> block_values;  ///< n_blocks x n_times
  std::vector<double> block_weights;
  std::size_t excluded = 0;          ///< X_0 off the grid
  std::size_t n_flagged = 0;
};

Correlation stationary_correlation(const SdeModel& model, const GridField& W,
                                   const Observable& observable, std::size_t n_traj,
                                   const ResponseSpec& spec, std::uint64_t master_seed);

/// R(t) = sum_x O(x) [exp(t A*) L* p_ss](x) h on the grid.
ResponseCurve response_semigroup(const SdeModel& model, const GridField& p_ss,
                                 const Perturbation& perturbation, const Observable& observable,
                                 const TimeGrid& t_grid, const FpSolveSpec& spec);

/// Integral of K O' p_ss on the grid (the common t = 0 value).
double response_at_zero(const GridField& p_ss, const Perturbation& perturbation,
                        const Observable& observable);

struct PairwiseCheck {
  std::string a;
  std::string b;
  double sup_diff = 0.0;
  double tol = 0.0;      ///< tolerance at the worst point
  double worst_t = 0.0;
  bool pass = false;
};

enum class CheckKind { mc_mc, mc_pde, direct_pde };

struct Tolerances {
  double sigma_multiple = 3.0;
  double mc_pde_floor = 2e-2;
  double direct_pde_floor = 3e-2;
};

/// Pointwise comparison over the shared time grid restricted to [t_lo, t_hi].
PairwiseCheck compare_curves(const ResponseCurve& a, const ResponseCurve& b, CheckKind kind,
                             const Tolerances& tol, double t_lo, double t_hi);

struct VerifyConfig {
  std::string scenario = "tanh-well";
  SdeModel model = models::tanh_well();
  Perturbation perturbation = perturbations::inverse_quadratic();
  Observable observable = observables::tanh_x();
  double grid_half_width = 32.0;
  std::size_t grid_points = 2048;
  FpSolveSpec fp{};
  ResponseSpec response{};
  std::vector<double> epsilons{0.1, 0.05};
  std::size_t n_traj = 200000;
  std::uint64_t seed = 20240601;
  Tolerances tolerances{};
  double check_t_lo = 0.0;
  double check_t_hi = 5.0;
  bool flip_y_sign = false;  ///< negative control
};

struct VerifyReport {
  std::string scenario;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<ResponseCurve> curves;
  std::vector<PairwiseCheck> checks;
  std::optional<LinearityReport> linearity;
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;
  bool pass = false;
  std::optional<std::string> failure;
  double r0_quadrature = 0.0;
  SolveLog stationary_log;
};

/// Seed of one estimator, derived from the master seed and the method.
std::uint64_t method_seed(std::uint64_t master_seed, ResponseMethod method);

/// Run the four estimators on one scenario and compare all six pairs.
/// Failures inside a method are caught and recorded in `failure`.
VerifyReport verify_fdt(const VerifyConfig& config);

}  // namespace levyfdt
