#include "spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <numbers>
#include <mutex>

#include "levyfdt/errors.hpp"

namespace levyfdt::detail {

namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FourierPlan::FourierPlan(std::size_t n) : n_(n) {
  std::vector<double> re(n);
  std::vector<Complex> sp(n / 2 + 1);
  const int ni = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  auto* c = reinterpret_cast<fftw_complex*>(sp.data());
  r2c_ = fftw_plan_dft_r2c_1d(ni, re.data(), c, flags);
  c2r_ = fftw_plan_dft_c2r_1d(ni, c, re.data(), flags);
  if (r2c_ == nullptr || c2r_ == nullptr) throw NumericalError("FFTW plan creation failed");
}

FourierPlan::~FourierPlan() {
  std::lock_guard lock(plan_mutex());
  if (r2c_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(r2c_));
  if (c2r_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(c2r_));
}

std::shared_ptr<const FourierPlan> FourierPlan::get(std::size_t n) {
  static std::map<std::size_t, std::shared_ptr<const FourierPlan>> registry;
  std::lock_guard lock(plan_mutex());
  auto it = registry.find(n);
  if (it != registry.end()) return it->second;
  auto plan = std::make_shared<const FourierPlan>(n);
  registry.emplace(n, plan);
  return plan;
}

void FourierPlan::forward(std::span<const double> in, std::span<Complex> out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void FourierPlan::inverse(std::span<Complex> in, std::span<double> out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  const double s = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= s;
}

std::vector<Complex> derivative_multiplier(const Grid1D& grid) {
  const std::size_t m = grid.size() / 2 + 1;
  std::vector<Complex> mult(m);
  for (std::size_t k = 0; k < m; ++k) mult[k] = Complex(0.0, grid.frequency(k));
  mult[m - 1] = 0.0;
  return mult;
}

std::vector<double> fractional_multiplier(const Grid1D& grid, double alpha) {
  const std::size_t m = grid.size() / 2 + 1;
  std::vector<double> mult(m);
  for (std::size_t k = 0; k < m; ++k) {
    mult[k] = std::pow(std::numbers::pi * static_cast<double>(k) / grid.half_width(), alpha);
  }
  return mult;
}

namespace {

template <class M>
void apply_impl(const FourierPlan& plan, std::span<const M> mult, std::span<const double> in,
                std::span<double> out) {
  if (in.size() != plan.size() || out.size() != plan.size() ||
      mult.size() != plan.spectrum_size()) {
    throw InvalidArgument("spectral multiplier size mismatch");
  }
  thread_local std::vector<Complex> buf;
  buf.resize(plan.spectrum_size());
  plan.forward(in, buf);
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= mult[k];
  plan.inverse(buf, out);
}

}  // namespace

void apply_multiplier(const FourierPlan& plan, std::span<const Complex> mult,
                      std::span<const double> in, std::span<double> out) {
  apply_impl(plan, mult, in, out);
}

void apply_multiplier(const FourierPlan& plan, std::span<const double> mult,
                      std::span<const double> in, std::span<double> out) {
  apply_impl(plan, mult, in, out);
}

}  // namespace levyfdt::detail
