#include "levyfdt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "levyfdt/errors.hpp"
#include "levyfdt/expr.hpp"

namespace levyfdt {

SdeModel::SdeModel(std::string name, StableParams stable, VectorField drift,
                   MatrixField diffusion)
    : name_(std::move(name)),
      stable_(stable),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)) {
  if (!drift_ || !diffusion_) throw InvalidArgument("SdeModel: drift and diffusion are required");
}

SdeModel SdeModel::scalar(std::string name, double alpha, Scalar1d drift, Scalar1d diffusion) {
  VectorField b = [drift](std::span<const double> x, std::span<double> out) {
    out[0] = drift(x[0]);
  };
  MatrixField s = [diffusion](std::span<const double> x, std::span<double> out) {
    out[0] = diffusion(x[0]);
  };
  SdeModel m(std::move(name), StableParams(alpha, 1), std::move(b), std::move(s));
  m.drift1_ = std::move(drift);
  m.diffusion1_ = std::move(diffusion);
  return m;
}

double SdeModel::drift_1d(double x) const {
  if (drift1_) return drift1_(x);
  if (dim() != 1) throw InvalidArgument("drift_1d called on a multidimensional model");
  double out = 0.0;
  drift_(std::span<const double>(&x, 1), std::span<double>(&out, 1));
  return out;
}

double SdeModel::diffusion_1d(double x) const {
  if (diffusion1_) return diffusion1_(x);
  if (dim() != 1) throw InvalidArgument("diffusion_1d called on a multidimensional model");
  double out = 0.0;
  diffusion_(std::span<const double>(&x, 1), std::span<double>(&out, 1));
  return out;
}

SdeModel SdeModel::with_scaled_drift(double factor) const {
  if (is_scalar()) {
    auto b = drift1_;
    return scalar(name_, alpha(), [b, factor](double x) { return factor * b(x); }, diffusion1_);
  }
  auto b = drift_;
  return SdeModel(name_, stable_,
                  [b, factor](std::span<const double> x, std::span<double> out) {
                    b(x, out);
                    for (double& v : out) v *= factor;
                  },
                  diffusion_);
}

namespace models {

SdeModel stable_ou(double lambda, double sigma, double alpha) {
  return SdeModel::scalar(
      "stable-ou", alpha, [lambda](double x) { return -lambda * x; },
      [sigma](double) { return sigma; });
}

SdeModel tanh_well(double a, double sigma, double alpha) {
  return SdeModel::scalar(
      "tanh-well", alpha, [a](double x) { return -a * x / std::sqrt(1.0 + x * x); },
      [sigma](double) { return sigma; });
}

SdeModel free_motion(double sigma, double alpha) {
  return SdeModel::scalar(
      "free", alpha, [](double) { return 0.0; }, [sigma](double) { return sigma; });
}

SdeModel custom(const std::vector<std::string>& drift, const std::vector<std::string>& diffusion,
                double alpha, int dim, std::string name) {
  if (dim < 1) throw InvalidArgument("custom model: dimension must be >= 1");
  const auto n = static_cast<std::size_t>(dim);
  std::vector<std::string> vars;
  if (dim == 1) {
    vars = {"x"};
  } else {
    for (int i = 1; i <= dim; ++i) vars.push_back("x" + std::to_string(i));
  }
  if (drift.size() != n) {
    throw ConfigError("custom model: drift needs " + std::to_string(n) + " expressions");
  }
  if (diffusion.size() != 1 && diffusion.size() != n * n) {
    throw ConfigError("custom model: diffusion needs 1 or " + std::to_string(n * n) +
                      " expressions");
  }
  std::vector<Expression> b;
  std::vector<Expression> s;
  for (const auto& e : drift) b.push_back(Expression::parse(e, vars));
  for (const auto& e : diffusion) s.push_back(Expression::parse(e, vars));

  if (dim == 1) {
    auto b0 = b[0];
    auto s0 = s[0];
    return SdeModel::scalar(std::move(name), alpha, [b0](double x) { return b0(x); },
                            [s0](double x) { return s0(x); });
  }
  VectorField bf = [b](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = b[i](x);
  };
  MatrixField sf = [s, n](std::span<const double> x, std::span<double> out) {
    if (s.size() == 1) {
      const double v = s[0](x);
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) out[i * n + i] = v;
      return;
    }
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i](x);
  };
  return SdeModel(std::move(name), StableParams(alpha, dim), std::move(bf), std::move(sf));
}

}  // namespace models

Perturbation::Perturbation(std::string name, Scalar1d time_profile, VectorField space_field,
                           int dim, std::optional<ScalarField> divergence)
    : name_(std::move(name)),
      time_profile_(std::move(time_profile)),
      space_(std::move(space_field)),
      divergence_(std::move(divergence)),
      dim_(dim) {
  if (!time_profile_ || !space_) throw InvalidArgument("Perturbation: F and K are required");
}

Perturbation Perturbation::scalar(std::string name, Scalar1d time_profile, Scalar1d space_field,
                                  std::optional<Scalar1d> derivative) {
  VectorField k = [space_field](std::span<const double> x, std::span<double> out) {
    out[0] = space_field(x[0]);
  };
  std::optional<ScalarField> div;
  if (derivative) {
    div = [d = *derivative](std::span<const double> x) { return d(x[0]); };
  }
  Perturbation p(std::move(name), std::move(time_profile), std::move(k), 1, std::move(div));
  p.space1_ = std::move(space_field);
  return p;
}

double Perturbation::space_field_1d(double x) const {
  if (space1_) return space1_(x);
  if (dim_ != 1) throw InvalidArgument("space_field_1d called on a multidimensional field");
  double out = 0.0;
  space_(std::span<const double>(&x, 1), std::span<double>(&out, 1));
  return out;
}

double Perturbation::divergence(std::span<const double> x) const {
  if (divergence_) return (*divergence_)(x);
  const auto n = static_cast<std::size_t>(dim_);
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  const double h = 1e-5 * (1.0 + std::sqrt(norm2));
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> xm(x.begin(), x.end());
  std::vector<double> kp(n);
  std::vector<double> km(n);
  double div = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    space_(xp, kp);
    space_(xm, km);
    div += (kp[i] - km[i]) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return div;
}

Perturbation Perturbation::with_time_profile(Scalar1d profile, std::string profile_name) const {
  Perturbation p = *this;
  p.time_profile_ = std::move(profile);
  p.name_ = name_ + "/" + profile_name;
  return p;
}

Perturbation Perturbation::scaled(double factor) const {
  Perturbation p = *this;
  auto k = space_;
  p.space_ = [k, factor](std::span<const double> x, std::span<double> out) {
    k(x, out);
    for (double& v : out) v *= factor;
  };
  if (space1_) {
    auto k1 = space1_;
    p.space1_ = [k1, factor](double x) { return factor * k1(x); };
  }
  if (divergence_) {
    auto d = *divergence_;
    p.divergence_ = [d, factor](std::span<const double> x) { return factor * d(x); };
  }
  return p;
}

namespace perturbations {

Scalar1d unit_step() {
  return [](double t) { return t >= 0.0 ? 1.0 : 0.0; };
}

Scalar1d mollified_impulse(double center, double width) {
  if (!(width > 0.0)) throw InvalidArgument("mollified_impulse: width must be positive");
  const double norm = 1.0 / (width * std::sqrt(2.0 * std::numbers::pi));
  return [center, width, norm](double t) {
    const double z = (t - center) / width;
    return norm * std::exp(-0.5 * z * z);
  };
}

Perturbation constant(double c) {
  auto p = Perturbation::scalar(
      "constant", unit_step(), [c](double) { return c; }, Scalar1d([](double) { return 0.0; }));
  p.set_decays(c == 0.0);
  return p;
}

Perturbation inverse_quadratic(double c) {
  return Perturbation::scalar(
      "inverse-quadratic", unit_step(), [c](double x) { return c / (1.0 + x * x); },
      Scalar1d([c](double x) {
        const double q = 1.0 + x * x;
        return -2.0 * c * x / (q * q);
      }));
}

Perturbation none() {
  return Perturbation::scalar(
      "none", unit_step(), [](double) { return 0.0; }, Scalar1d([](double) { return 0.0; }));
}

Perturbation custom(const std::string& field) {
  auto k = Expression::parse(field, {"x"});
  return Perturbation::scalar("custom", unit_step(), [k](double x) { return k(x); });
}

}  // namespace perturbations

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::fails_near_origin: return "fails-near-origin";
  }
  return "fail";
}

namespace {

using Eigen::MatrixXd;

MatrixXd sigma_at(const SdeModel& model, std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(model.dim());
  std::vector<double> buf(static_cast<std::size_t>(n * n));
  model.diffusion(x, buf);
  MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = buf[static_cast<std::size_t>(i * n + j)];
  }
  return s;
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Max over directions i of the Hilbert-Schmidt norm of the central-difference
// derivative of a matrix field, combined over i.
template <class F>
double matrix_gradient_norm(F&& field, std::span<const double> x) {
  const std::size_t n = x.size();
  const double h = 1e-5 * (1.0 + norm(x));
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> xm(x.begin(), x.end());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const MatrixXd d = (field(xp) - field(xm)) / (2.0 * h);
    total += d.squaredNorm();
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return std::sqrt(total);
}

}  // namespace

AssumptionAudit audit_assumptions(const SdeModel& model, const ProbeSpec& probe,
                                  std::uint64_t seed) {
  if (!(probe.half_width > 1.0) || probe.samples == 0) {
    throw InvalidArgument("audit_assumptions: probe box must contain the unit annulus");
  }
  const auto n = static_cast<std::size_t>(model.dim());
  const double R = probe.half_width;
  RngStream stream(seed, StreamDomain::probe, 0);

  AssumptionAudit audit;
  audit.probe = probe;
  audit.seed = seed;
  audit.holder.beta = probe.holder_beta;

  std::vector<double> x(n);
  std::vector<double> y(n);
  std::vector<double> bx(n);
  std::vector<double> by(n);

  auto uniform_point = [&](std::vector<double>& p) {
    for (double& c : p) c = stream.uniform(-R, R);
  };
  auto on_unit_sphere = [&](std::vector<double>& p) {
    if (n == 1) {
      p[0] = stream.uniform() < 0.5 ? -1.0 : 1.0;
      return;
    }
    double r = 0.0;
    do {
      for (double& c : p) c = stream.normal();
      r = norm(p);
    } while (r == 0.0);
    for (double& c : p) c /= r;
  };

  double lambda = 1.0;
  double k1 = std::numeric_limits<double>::infinity();
  std::vector<double> near_origin_ips;  // (<x,b>, |x|) pairs inside the unit ball
  std::vector<double> near_origin_norms;

  auto inspect_state = [&](const std::vector<double>& p) {
    const MatrixXd s = sigma_at(model, p);
    Eigen::JacobiSVD<MatrixXd> svd(s);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!std::isfinite(smax) || !(smin > 1e-12 * std::max(1.0, smax))) {
      throw AssumptionViolation("diffusion matrix is singular at probe point |x| = " +
                                std::to_string(norm(p)) + " (ellipticity violated)");
    }
    lambda = std::max({lambda, smax, 1.0 / smin});

    model.drift(p, bx);
    audit.bounds.drift_sup = std::max(audit.bounds.drift_sup, norm(bx));

    // div b by central differences
    const double h = 1e-5 * (1.0 + norm(p));
    std::vector<double> xp = p;
    std::vector<double> xm = p;
    std::vector<double> bp(n);
    std::vector<double> bm(n);
    double div = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xp[i] = p[i] + h;
      xm[i] = p[i] - h;
      model.drift(xp, bp);
      model.drift(xm, bm);
      div += (bp[i] - bm[i]) / (2.0 * h);
      xp[i] = p[i];
      xm[i] = p[i];
    }
    audit.bounds.drift_divergence_sup = std::max(audit.bounds.drift_divergence_sup, std::abs(div));
    audit.bounds.diffusion_gradient_sup =
        std::max(audit.bounds.diffusion_gradient_sup,
                 matrix_gradient_norm([&](std::span<const double> q) { return sigma_at(model, q); },
                                      p));
    audit.bounds.inverse_diffusion_gradient_sup = std::max(
        audit.bounds.inverse_diffusion_gradient_sup,
        matrix_gradient_norm(
            [&](std::span<const double> q) { return MatrixXd(sigma_at(model, q).inverse()); }, p));

    const double r = norm(p);
    double ip = 0.0;
    for (std::size_t i = 0; i < n; ++i) ip += p[i] * bx[i];
    if (r >= 1.0 && r <= R) {
      k1 = std::min(k1, -ip / r);
      ++audit.dissipativity.annulus_probes;
    } else if (r < 1.0 && r > 0.0) {
      near_origin_ips.push_back(ip);
      near_origin_norms.push_back(r);
    }
  };

  // Box probes, plus a tenth of the budget exactly on the inner sphere where
  // the infimum of many drifts is attained.
  for (std::size_t k = 0; k < probe.samples; ++k) {
    uniform_point(x);
    inspect_state(x);
  }
  for (std::size_t k = 0; k < std::max<std::size_t>(1, probe.samples / 10); ++k) {
    on_unit_sphere(x);
    inspect_state(x);
  }

  // Hoelder ratios: half the pairs far apart, half at small separations.
  const double beta = probe.holder_beta;
  for (std::size_t k = 0; k < probe.samples; ++k) {
    uniform_point(x);
    if (k % 2 == 0) {
      uniform_point(y);
    } else {
      const double scale = std::pow(10.0, -stream.uniform(0.0, 4.0));
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + scale * stream.uniform(-1.0, 1.0);
    }
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
    const double dist = norm(d);
    if (dist == 0.0) continue;
    model.drift(x, bx);
    model.drift(y, by);
    for (std::size_t i = 0; i < n; ++i) d[i] = bx[i] - by[i];
    const double denom = std::pow(dist, beta);
    audit.holder.drift_max_ratio = std::max(audit.holder.drift_max_ratio, norm(d) / denom);
    const double sd = (sigma_at(model, x) - sigma_at(model, y)).norm();
    audit.holder.diffusion_max_ratio = std::max(audit.holder.diffusion_max_ratio, sd / denom);
    ++audit.holder.pairs;
  }

  audit.ellipticity_lambda = lambda;

  auto& dis = audit.dissipativity;
  dis.k1 = std::isfinite(k1) ? k1 : 0.0;
  dis.moments = levy_moments(model.stable());
  dis.c1 = lambda * lambda * dis.moments.small_jump_second + lambda * dis.moments.large_jump_first;
  dis.near_origin_worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < near_origin_ips.size(); ++i) {
    dis.near_origin_worst =
        std::max(dis.near_origin_worst, near_origin_ips[i] + dis.k1 * near_origin_norms[i]);
  }
  if (near_origin_ips.empty()) dis.near_origin_worst = 0.0;

  if (!(dis.k1 > 0.0) || !(std::numbers::sqrt2 * dis.k1 > dis.c1)) {
    dis.verdict = Verdict::fail;
  } else if (dis.near_origin_worst > 0.0) {
    dis.verdict = Verdict::fails_near_origin;
  } else {
    dis.verdict = Verdict::pass;
  }
  return audit;
}

}  // namespace levyfdt
