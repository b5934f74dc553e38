#pragma once

// Periodic spectral discretization of the 1D generator and its adjoint:
//
//   A u   = b u' - |sigma|^alpha (-Delta)^{alpha/2} u
//   A* p  = -(b p)' - (-Delta)^{alpha/2} (|sigma|^alpha p)
//
// The derivative drops the Nyquist mode, which makes it exactly antisymmetric,
// and the fractional Laplacian is a real even multiplier, so the two discrete
// operators are exact transposes under the h-weighted inner product.

#include <span>
#include <string>
#include <vector>

#include "levyfdt/grid.hpp"
#include "levyfdt/model.hpp"

namespace levyfdt {

/// Fraction of spectral energy above which the aliasing warning fires.
inline constexpr double kAliasingThreshold = 1e-6;

struct OperatorDiagnostics {
  double high_frequency_fraction = 0.0;
  std::vector<std::string> warnings;
};

/// Share of sum |f_k|^2 carried by the top 10% of frequencies.
double high_frequency_fraction(const GridField& f);

/// Spectral (-Delta)^{alpha/2}: multiplication by |xi_k|^alpha.
GridField fractional_laplacian(const GridField& f, double alpha);

/// Spectral first derivative.
GridField spectral_derivative(const GridField& f);

/// Drift and jump-intensity fields of a 1D model sampled on a grid.
struct GridCoefficients {
  std::vector<double> drift;
  std::vector<double> jump_weight;  ///< |sigma(x)|^alpha
  bool constant_sigma = true;

  static GridCoefficients sample(const SdeModel& model, const Grid1D& grid);
};

/// A u on the grid. Warnings (aliasing) go to `diag` when given, otherwise to
/// the library warning sink.
GridField apply_generator(const SdeModel& model, const GridField& u,
                          OperatorDiagnostics* diag = nullptr);

/// A* phi on the grid.
GridField apply_adjoint(const SdeModel& model, const GridField& phi,
                        OperatorDiagnostics* diag = nullptr);

/// Coefficient-level forms for inner loops (no diagnostics).
void apply_generator(const Grid1D& grid, const GridCoefficients& c, double alpha,
                     std::span<const double> u, std::span<double> out);
void apply_adjoint(const Grid1D& grid, const GridCoefficients& c, double alpha,
                   std::span<const double> phi, std::span<double> out);

struct HeatKernelSpec {
  double half_width = 16.0;
  std::size_t n_points = 8192;
  double bump_width_cells = 1.5;  ///< standard deviation of the initial bump in cells
  double window = 5.0;            ///< ratio taken over |y - x0| <= window
  double band_low = 0.1;
  double band_high = 10.0;
};

struct HeatKernelReport {
  double t = 0.0;
  double x0 = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  bool within_band = false;
  double peak_t = 0.0;
  double peak_2t = 0.0;
  double peak_ratio = 0.0;           ///< peak(2t) / peak(t)
  double expected_peak_ratio = 0.0;  ///< 2^{-1/alpha}
  bool finite = false;               ///< no zeros, negatives or non-finite values in the window
};

/// Evolve a narrow bump at x0 for t_small and compare against the two-sided
/// bound t (t^{1/alpha} + |y - x0|)^{-1-alpha}.
HeatKernelReport heat_kernel_diagnostic(const SdeModel& model, double t_small, double x0,
                                        const HeatKernelSpec& spec = {});

}  // namespace levyfdt
