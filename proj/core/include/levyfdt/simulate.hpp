#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levyfdt/model.hpp"
#include "levyfdt/rng.hpp"

namespace levyfdt {

enum class Domain {
  whole_line,  ///< plain R^n
  periodic,    ///< each coordinate wrapped into [-L, L) after every step
};

struct IntegratorSpec {
  static constexpr const char* scheme = "explicit-Euler-with-exact-stable-increments";

  double dt = 1e-3;
  double t_max = 10.0;
  std::size_t save_stride = 1;
  Domain domain = Domain::whole_line;
  double half_width = 32.0;  ///< L for Domain::periodic

  void validate() const;
  std::size_t n_steps() const;
  std::size_t n_saved() const { return n_steps() / save_stride + 1; }
  double saved_time(std::size_t i) const;
};

/// Map x into [-L, L) periodically.
double wrap_periodic(double x, double half_width);

/// Perturbed drift b + eps F(t) K.
struct Drive {
  const Perturbation* perturbation = nullptr;
  double epsilon = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> states;  ///< n_saved x dim, row-major
  int dim = 1;
  bool flagged = false;
  std::size_t flag_step = 0;  ///< first non-finite step when flagged

  std::span<const double> state(std::size_t i) const {
    return {states.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// X_{k+1} = X_k + [b(X_k) + eps F(t_k) K(X_k)] dt + sigma(X_k) dL_k.
Trajectory integrate_path(const SdeModel& model, std::span<const double> x0,
                          const IntegratorSpec& spec, std::optional<Drive> drive,
                          RngStream& stream);

/// One unperturbed and several perturbed 1D paths driven by the same
/// increments. states[v][i] is variant v at saved index i; variant 0 is the
/// baseline and variant j >= 1 uses epsilons[j - 1].
struct CoupledTrajectory {
  std::vector<std::vector<double>> states;
  bool flagged = false;
};

CoupledTrajectory integrate_coupled(const SdeModel& model, double x0, const IntegratorSpec& spec,
                                    const Perturbation& perturbation,
                                    std::span<const double> epsilons, RngStream& stream);

/// Named scalar function of the state.
struct Observable {
  std::string name;
  ScalarField f;
  bool in_lp = true;  ///< false when O is unbounded (outside the linear-response hypotheses)

  double operator()(std::span<const double> x) const { return f(x); }
  double operator()(double x) const { return f(std::span<const double>(&x, 1)); }
};

namespace observables {
Observable constant(double c = 1.0);
Observable tanh_x();
Observable identity();
Observable rational();  ///< x / (1 + x^2)
/// Smoothed indicator of |x - center| < half_width with edge width `edge`.
Observable bump(double center = 0.0, double half_width = 1.0, double edge = 0.2);
Observable moment();    ///< sqrt(1 + |x|^2)
Observable cos_xi(double xi);
/// Built-in by name: constant, tanh, x, rational, bump, moment.
Observable by_name(const std::string& name);
std::vector<std::string> names();
}  // namespace observables

/// Initial law: a fixed point or a pool of states (trajectory i takes state
/// i mod pool size).
class InitialLaw {
 public:
  static InitialLaw fixed(std::vector<double> x0);
  static InitialLaw pool(std::vector<double> states, int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return states_.size() / static_cast<std::size_t>(dim_); }
  std::span<const double> state(std::size_t traj) const;

 private:
  InitialLaw(std::vector<double> states, int dim) : states_(std::move(states)), dim_(dim) {}
  std::vector<double> states_;
  int dim_;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> observable_mean;  ///< [observable][time]
  std::vector<std::vector<double>> stderr_;          ///< [observable][time]
  std::size_t n_traj = 0;
  std::size_t n_flagged = 0;
  std::uint64_t seed = 0;
  std::string model_name;
  std::optional<std::string> warning;
  /// Per-block means, [observable][block * n_times + time], and block weights;
  /// linear functionals of the curves take their standard error from these.
  std::vector<std::vector<double>> block_means;
  std::vector<double> block_weights;
};

/// Estimate and batch-means standard error of sum_i w_i E O(X_{t_i}).
std::pair<double, double> linear_functional(const EnsembleResult& result, std::size_t observable,
                                            std::span<const double> weights);

/// Weights w with sum_i w_i y_i = least-squares slope of y against t.
std::vector<double> slope_weights(std::span<const double> t);

struct EnsembleOptions {
  unsigned threads = 0;
  std::size_t n_blocks = 64;
  StreamDomain stream_domain = StreamDomain::trajectory;
};

/// Flagged fraction above this carries a warning.
inline constexpr double kFlagWarnFraction = 0.01;
/// Flagged fraction above this is a NumericalError.
inline constexpr double kFlagErrorFraction = 0.10;

/// Returns the warning text for a flag count, throws above the error level.
std::optional<std::string> flag_policy(std::size_t flagged, std::size_t total);

EnsembleResult run_ensemble(const SdeModel& model, const InitialLaw& init,
                            const IntegratorSpec& spec, std::optional<Drive> drive,
                            const std::vector<Observable>& observables, std::size_t n_traj,
                            std::uint64_t master_seed, const EnsembleOptions& options = {});

struct SteadyStateSpec {
  double burn_in = 20.0;
  std::size_t n_samples = 100000;
  double thinning = 0.2;       ///< time between retained samples of one chain
  std::size_t n_chains = 0;    ///< 0 = min(n_samples, 1000)
  double dt = 1e-3;
  Domain domain = Domain::whole_line;
  double half_width = 32.0;
  std::vector<double> start;   ///< chain start; empty = origin
  unsigned threads = 0;
  std::size_t max_restarts = 8;
};

struct SteadyStateSamples {
  std::vector<double> states;  ///< n_samples x dim, chain-major
  int dim = 1;
  std::size_t n_chains = 0;
  std::size_t n_restarts = 0;  ///< chains restarted after a flagged path
  std::optional<std::string> warning;
};

/// Long-run samples after burn-in from several independent chains.
SteadyStateSamples sample_steady_state(const SdeModel& model, const SteadyStateSpec& spec,
                                       std::uint64_t master_seed);

}  // namespace levyfdt
