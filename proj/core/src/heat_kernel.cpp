#include <algorithm>
#include <cmath>
#include <limits>

#include "levyfdt/errors.hpp"
#include "levyfdt/fokker_planck.hpp"
#include "levyfdt/nonlocal.hpp"

namespace levyfdt {

HeatKernelReport heat_kernel_diagnostic(const SdeModel& model, double t_small, double x0,
                                        const HeatKernelSpec& spec) {
  if (!(t_small > 0.0)) throw InvalidArgument("heat kernel diagnostic: t must be positive");
  if (std::abs(x0) + spec.window >= spec.half_width) {
    throw InvalidArgument("heat kernel diagnostic: window does not fit on the grid");
  }
  const Grid1D grid(spec.half_width, spec.n_points);
  const double sd = spec.bump_width_cells * grid.spacing();
  GridField p0 = GridField::sample(
      grid, [&](double x) { return std::exp(-0.5 * (x - x0) * (x - x0) / (sd * sd)); },
      FieldKind::density);
  p0.normalize();

  FpSolveSpec fp;
  fp.dt = std::min(1e-3, t_small / 10.0);
  fp.t_end = 2.0 * t_small;
  const Evolution ev = evolve_density(model, p0, fp, std::nullopt, t_small);

  const auto nearest = [&](double t) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < ev.times.size(); ++i) {
      if (std::abs(ev.times[i] - t) < std::abs(ev.times[best] - t)) best = i;
    }
    return best;
  };
  const GridField& pt = ev.snapshots[nearest(t_small)];
  const GridField& p2t = ev.snapshots[nearest(2.0 * t_small)];

  HeatKernelReport rep;
  rep.t = t_small;
  rep.x0 = x0;
  const double a = model.alpha();
  const double scale = std::pow(t_small, 1.0 / a);
  rep.ratio_min = std::numeric_limits<double>::infinity();
  rep.ratio_max = 0.0;
  rep.finite = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = std::abs(grid.x(i) - x0);
    if (r > spec.window) continue;
    const double bound = t_small * std::pow(scale + r, -1.0 - a);
    const double q = pt[i] / bound;
    if (!std::isfinite(q) || !(q > 0.0)) rep.finite = false;
    rep.ratio_min = std::min(rep.ratio_min, q);
    rep.ratio_max = std::max(rep.ratio_max, q);
  }
  rep.within_band = rep.finite && rep.ratio_min >= spec.band_low && rep.ratio_max <= spec.band_high;
  rep.peak_t = pt.max();
  rep.peak_2t = p2t.max();
  rep.peak_ratio = rep.peak_2t / rep.peak_t;
  rep.expected_peak_ratio = std::pow(2.0, -1.0 / a);
  return rep;
}

}  // namespace levyfdt
