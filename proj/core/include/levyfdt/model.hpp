#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levyfdt/stable.hpp"

namespace levyfdt {

/// x (length n) -> out (length n).
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;
/// x (length n) -> out (n x n, row-major).
using MatrixField = std::function<void(std::span<const double>, std::span<double>)>;
using ScalarField = std::function<double(std::span<const double>)>;
using Scalar1d = std::function<double(double)>;

/// dX = b(X) dt + sigma(X_{t-}) dL_t with L a symmetric alpha-stable process.
///
/// Field callbacks must be free of internal mutation; the simulator calls them
/// from several workers at once.
class SdeModel {
 public:
  SdeModel(std::string name, StableParams stable, VectorField drift, MatrixField diffusion);

  /// One-dimensional model from scalar callbacks (the fast path used by the
  /// integrator and the grid solvers).
  static SdeModel scalar(std::string name, double alpha, Scalar1d drift, Scalar1d diffusion);

  const std::string& name() const { return name_; }
  const StableParams& stable() const { return stable_; }
  double alpha() const { return stable_.alpha(); }
  int dim() const { return stable_.dim(); }

  void drift(std::span<const double> x, std::span<double> out) const { drift_(x, out); }
  void diffusion(std::span<const double> x, std::span<double> out) const { diffusion_(x, out); }

  /// Scalar accessors; throw unless dim() == 1.
  double drift_1d(double x) const;
  double diffusion_1d(double x) const;
  bool is_scalar() const { return static_cast<bool>(drift1_); }

  /// Return a copy with the drift multiplied by `factor`.
  SdeModel with_scaled_drift(double factor) const;

 private:
  std::string name_;
  StableParams stable_;
  VectorField drift_;
  MatrixField diffusion_;
  Scalar1d drift1_;
  Scalar1d diffusion1_;
};

namespace models {

/// b(x) = -lambda x, constant sigma.
SdeModel stable_ou(double lambda = 1.0, double sigma = 1.0, double alpha = 1.5);
/// b(x) = -a x / sqrt(1 + x^2), constant sigma.
SdeModel tanh_well(double a = 2.0, double sigma = 1.0, double alpha = 1.5);
/// b = 0, constant sigma.
SdeModel free_motion(double sigma = 1.0, double alpha = 1.5);
/// Drift and diffusion from expression strings. In 1D the variable is `x`;
/// in n >= 2 the variables are x1..xn, `drift` has n entries and `diffusion`
/// has n*n entries (row-major) or a single entry meaning a multiple of I.
SdeModel custom(const std::vector<std::string>& drift, const std::vector<std::string>& diffusion,
                double alpha, int dim = 1, std::string name = "custom");

}  // namespace models

/// Separable drift perturbation F(t) K(x).
class Perturbation {
 public:
  Perturbation(std::string name, Scalar1d time_profile, VectorField space_field, int dim,
               std::optional<ScalarField> divergence = std::nullopt);

  static Perturbation scalar(std::string name, Scalar1d time_profile, Scalar1d space_field,
                             std::optional<Scalar1d> derivative = std::nullopt);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }

  double time_profile(double t) const { return time_profile_(t); }
  void space_field(std::span<const double> x, std::span<double> out) const { space_(x, out); }
  double space_field_1d(double x) const;

  /// div K: the explicit function when one was supplied, otherwise central
  /// differences with step 1e-5 (1 + |x|).
  double divergence(std::span<const double> x) const;
  double divergence_1d(double x) const { return divergence(std::span<const double>(&x, 1)); }
  bool has_explicit_divergence() const { return static_cast<bool>(divergence_); }

  /// False when K is known not to satisfy |x| K(x) bounded.
  bool decays() const { return decays_; }
  void set_decays(bool d) { decays_ = d; }

  /// Copy with F replaced.
  Perturbation with_time_profile(Scalar1d profile, std::string profile_name) const;
  /// Copy with K multiplied by `factor`.
  Perturbation scaled(double factor) const;

 private:
  std::string name_;
  Scalar1d time_profile_;
  VectorField space_;
  Scalar1d space1_;
  std::optional<ScalarField> divergence_;
  int dim_;
  bool decays_ = true;
};

namespace perturbations {

/// F(t) = 1 for t >= 0.
Scalar1d unit_step();
/// Gaussian bump of unit area centred at `center` with width `width`.
Scalar1d mollified_impulse(double center = 0.5, double width = 0.05);

/// K(x) = c (violates the |x| K bounded hypothesis; flagged via decays()).
Perturbation constant(double c = 1.0);
/// K(x) = c / (1 + x^2).
Perturbation inverse_quadratic(double c = 1.0);
/// Zero field.
Perturbation none();
/// K from an expression in x (1D), divergence by finite differences.
Perturbation custom(const std::string& field);

}  // namespace perturbations

struct ProbeSpec {
  double half_width = 50.0;   ///< probes live in [-R, R]^n; annulus is 1 <= |x| <= R
  std::size_t samples = 20000;
  double holder_beta = 0.75;
};

enum class Verdict { pass, fail, fails_near_origin };

const char* to_string(Verdict v);

struct HolderEstimate {
  double beta = 0.0;
  double drift_max_ratio = 0.0;
  double diffusion_max_ratio = 0.0;
  std::size_t pairs = 0;
};

struct BoundEstimate {
  double drift_sup = 0.0;
  double drift_divergence_sup = 0.0;
  double diffusion_gradient_sup = 0.0;
  double inverse_diffusion_gradient_sup = 0.0;
};

struct DissipativityEstimate {
  double k1 = 0.0;            ///< inf of -<x, b(x)> / |x| over the annulus
  double c1 = 0.0;            ///< Lambda^2 m2 + Lambda m1 from the Levy moments
  LevyMoments moments{};
  double near_origin_worst = 0.0;  ///< max of <x,b> + k1 |x| over |x| < 1
  std::size_t annulus_probes = 0;
  Verdict verdict = Verdict::fail;
};

struct AssumptionAudit {
  HolderEstimate holder;
  double ellipticity_lambda = 0.0;
  BoundEstimate bounds;
  DissipativityEstimate dissipativity;
  ProbeSpec probe;
  std::uint64_t seed = 0;
};

/// Monte Carlo smoke test of the standing assumptions on the probe box.
/// Throws AssumptionViolation if sigma is singular at a probe point.
AssumptionAudit audit_assumptions(const SdeModel& model, const ProbeSpec& probe,
                                  std::uint64_t seed);

}  // namespace levyfdt
