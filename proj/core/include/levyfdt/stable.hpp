#pragma once

// Symmetric alpha-stable variates, Levy increments and distributional oracles.
//
// The standard law has characteristic function exp(-|xi|^alpha). In dimension
// n >= 2 the vector is isotropic: X = sqrt(A) * G with A a positive
// (alpha/2)-stable variate and G ~ N(0, 2 I).

#include <cstddef>
#include <span>
#include <vector>

#include "levyfdt/rng.hpp"

namespace levyfdt {

class StableParams {
 public:
  /// Throws InvalidArgument unless 1 < alpha < 2 and dim >= 1.
  explicit StableParams(double alpha, int dim = 1);

  double alpha() const { return alpha_; }
  int dim() const { return dim_; }

 private:
  double alpha_;
  int dim_;
};

/// One standard symmetric stable variate (Chambers-Mallows-Stuck).
double draw_standard_stable(double alpha, RngStream& stream);

/// Positive stable variate with Laplace transform exp(-s^gamma), 0 < gamma < 1
/// (Kanter's representation).
double draw_positive_stable(double gamma, RngStream& stream);

/// Fill `out` (length params.dim()) with one standard stable vector.
void draw_stable(const StableParams& params, RngStream& stream, std::span<double> out);

/// `count` i.i.d. standard stable vectors, stored row-major (count x dim).
/// Drawing N then M values from one stream gives the same sequence as N + M.
std::vector<double> sample_stable(const StableParams& params, std::size_t count,
                                  RngStream& stream);

struct LevyIncrement {
  double dt;
  std::vector<double> value;
};

/// dt^(1/alpha), the self-similarity factor of the increment over dt.
double increment_scale(double alpha, double dt);

/// L_{t+dt} - L_t, exact in law.
LevyIncrement levy_increment(const StableParams& params, double dt, RngStream& stream);

/// Density of the standard 1D law by numerical Fourier inversion of the
/// characteristic function. Throws for dim != 1.
std::vector<double> stable_density_oracle(const StableParams& params,
                                          std::span<const double> x);

/// Single-point version of stable_density_oracle.
double stable_density(double alpha, double x);

/// Normalising constant c_alpha of the Levy measure c_alpha dy / |y|^(n+alpha),
/// obtained numerically from  int (1 - cos(y_1)) nu(dy) = 1.
double levy_measure_constant(const StableParams& params);

/// Moments of the Levy measure entering the dissipativity constant.
struct LevyMoments {
  double c_alpha;
  double small_jump_second;  ///< int_{|y|<1} |y|^2 nu(dy)
  double large_jump_first;   ///< int_{|y|>=1} |y| nu(dy)
};

LevyMoments levy_moments(const StableParams& params);

/// Surface area of the unit sphere S^{n-1} in R^n (2 for n = 1).
double unit_sphere_area(int n);

}  // namespace levyfdt
