#include "levyfdt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "levyfdt/errors.hpp"

namespace levyfdt {

Grid1D::Grid1D(double half_width, std::size_t n_points) : L_(half_width), n_(n_points) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidArgument("grid half width must be positive");
  }
  if (n_points < 64 || (n_points & (n_points - 1)) != 0) {
    throw InvalidArgument("grid size must be a power of two >= 64");
  }
  h_ = 2.0 * L_ / static_cast<double>(n_);
}

std::vector<double> Grid1D::points() const {
  std::vector<double> p(n_);
  for (std::size_t i = 0; i < n_; ++i) p[i] = x(i);
  return p;
}

double Grid1D::frequency(std::size_t k) const {
  const auto kk = static_cast<double>(k);
  const auto n = static_cast<double>(n_);
  return std::numbers::pi * (k < n_ / 2 ? kk : kk - n) / L_;
}

double Grid1D::max_frequency() const {
  return std::numbers::pi * static_cast<double>(n_ / 2) / L_;
}

const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::density: return "density";
    case FieldKind::observable: return "observable";
    case FieldKind::generic: return "generic";
  }
  return "generic";
}

GridField::GridField(Grid1D grid, std::vector<double> values, FieldKind kind)
    : grid_(grid), values_(std::move(values)), kind_(kind) {
  if (values_.size() != grid_.size()) throw InvalidArgument("field length does not match grid");
}

GridField::GridField(Grid1D grid, FieldKind kind)
    : grid_(grid), values_(grid.size(), 0.0), kind_(kind) {}

GridField GridField::sample(const Grid1D& grid, const std::function<double(double)>& f,
                            FieldKind kind) {
  GridField out(grid, kind);
  const double L = grid.half_width();
  out.values_[0] = 0.5 * (f(-L) + f(L));
  for (std::size_t i = 1; i < grid.size(); ++i) out.values_[i] = f(grid.x(i));
  return out;
}

double GridField::mass() const {
  return grid_.spacing() * std::accumulate(values_.begin(), values_.end(), 0.0);
}

double GridField::inner(const GridField& o) const {
  if (!(grid_ == o.grid_)) throw InvalidArgument("inner product of fields on different grids");
  return grid_.spacing() * std::inner_product(values_.begin(), values_.end(), o.values_.begin(), 0.0);
}

double GridField::l1_norm() const {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return grid_.spacing() * s;
}

double GridField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double GridField::interpolate(double x) const {
  const double L = grid_.half_width();
  const double period = 2.0 * L;
  double u = std::fmod(x + L, period);
  if (u < 0.0) u += period;
  const double s = u / grid_.spacing();
  auto i = static_cast<std::size_t>(std::floor(s));
  const double w = s - static_cast<double>(i);
  const std::size_t n = grid_.size();
  i %= n;
  return (1.0 - w) * values_[i] + w * values_[(i + 1) % n];
}

void GridField::normalize() {
  const double m = mass();
  if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("cannot normalize a field of non-positive mass");
  for (double& v : values_) v /= m;
}

void GridField::check_density() const {
  const double lo = min();
  if (lo < -kDensityUndershoot || !std::isfinite(lo)) {
    throw NumericalError("density has value " + std::to_string(lo) + " below the undershoot tolerance");
  }
}

double l1_distance(const GridField& a, const GridField& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("l1_distance of fields on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return a.grid().spacing() * s;
}

}  // namespace levyfdt
