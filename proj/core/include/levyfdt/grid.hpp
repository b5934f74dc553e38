#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace levyfdt {

/// Uniform periodic grid x_i = -L + i h on [-L, L), h = 2L / n.
class Grid1D {
 public:
  /// Throws InvalidArgument unless L > 0 and n is a power of two >= 64.
  Grid1D(double half_width, std::size_t n_points);

  double half_width() const { return L_; }
  std::size_t size() const { return n_; }
  double spacing() const { return h_; }
  double x(std::size_t i) const { return -L_ + h_ * static_cast<double>(i); }
  std::vector<double> points() const;

  /// Signed angular frequency of FFT bin k: pi k / L for k < n/2, pi (k - n) / L after.
  double frequency(std::size_t k) const;
  double max_frequency() const;

  bool operator==(const Grid1D& o) const { return L_ == o.L_ && n_ == o.n_; }

 private:
  double L_;
  std::size_t n_;
  double h_;
};

enum class FieldKind { density, observable, generic };

const char* to_string(FieldKind k);

/// Small negative values tolerated in a density before it is considered invalid.
inline constexpr double kDensityUndershoot = 1e-6;

class GridField {
 public:
  GridField(Grid1D grid, std::vector<double> values, FieldKind kind = FieldKind::generic);
  GridField(Grid1D grid, FieldKind kind = FieldKind::generic);

  /// Sample f on the grid. The point x = -L is shared with x = L, so it takes
  /// the average of both one-sided values; this keeps even and odd functions
  /// exactly even and odd on the grid.
  static GridField sample(const Grid1D& grid, const std::function<double(double)>& f,
                          FieldKind kind = FieldKind::generic);

  const Grid1D& grid() const { return grid_; }
  FieldKind kind() const { return kind_; }
  void set_kind(FieldKind k) { kind_ = k; }
  std::size_t size() const { return values_.size(); }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  /// Riemann sum h * sum(values).
  double mass() const;
  double inner(const GridField& o) const;
  double l1_norm() const;
  double max() const;
  double min() const;

  /// Periodic linear interpolation at x.
  double interpolate(double x) const;

  /// Scale to unit mass; throws NumericalError if the mass is not positive.
  void normalize();

  /// Throws NumericalError unless every value is >= -kDensityUndershoot.
  void check_density() const;

 private:
  Grid1D grid_;
  std::vector<double> values_;
  FieldKind kind_;
};

double l1_distance(const GridField& a, const GridField& b);

/// Index i such that grid.x(i) = -grid.x(i') mirrors i' (i.e. (n - i) mod n).
inline std::size_t mirror_index(const Grid1D& g, std::size_t i) {
  return (g.size() - i) % g.size();
}

}  // namespace levyfdt
