#pragma once

// Real-to-complex transforms with per-size cached FFTW plans.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "levyfdt/grid.hpp"

namespace levyfdt::detail {

using Complex = std::complex<double>;

class FourierPlan {
 public:
  /// Shared plan for length n. Plan creation is serialized; execution is
  /// safe from any number of threads.
  static std::shared_ptr<const FourierPlan> get(std::size_t n);

  ~FourierPlan();
  FourierPlan(const FourierPlan&) = delete;
  FourierPlan& operator=(const FourierPlan&) = delete;

  std::size_t size() const { return n_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }

  /// out has n/2 + 1 entries.
  void forward(std::span<const double> in, std::span<Complex> out) const;
  /// Normalized inverse; `in` is clobbered.
  void inverse(std::span<Complex> in, std::span<double> out) const;

  explicit FourierPlan(std::size_t n);

 private:
  std::size_t n_;
  void* r2c_ = nullptr;
  void* c2r_ = nullptr;
};

/// i xi_k with the Nyquist bin zeroed, so the discrete derivative is real and
/// antisymmetric.
std::vector<Complex> derivative_multiplier(const Grid1D& grid);
/// |xi_k|^alpha.
std::vector<double> fractional_multiplier(const Grid1D& grid, double alpha);

void apply_multiplier(const FourierPlan& plan, std::span<const Complex> mult,
                      std::span<const double> in, std::span<double> out);
void apply_multiplier(const FourierPlan& plan, std::span<const double> mult,
                      std::span<const double> in, std::span<double> out);

}  // namespace levyfdt::detail
