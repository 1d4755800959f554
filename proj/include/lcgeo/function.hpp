#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lcgeo/grid.hpp"
#include "lcgeo/util.hpp"

namespace lcgeo {

enum class FormKind {
  gaussian,
  indicator_ball,
  indicator_cube,
  exp_euclidean_norm,
  quadratic,
  exp_p_norm,
};

inline std::string form_kind_name(FormKind k) {
  switch (k) {
    case FormKind::gaussian: return "gaussian";
    case FormKind::indicator_ball: return "indicator_ball";
    case FormKind::indicator_cube: return "indicator_cube";
    case FormKind::exp_euclidean_norm: return "exp_euclidean_norm";
    case FormKind::quadratic: return "quadratic";
    case FormKind::exp_p_norm: return "exp_p_norm";
  }
  return "?";
}

inline FormKind form_kind_from_name(const std::string& s) {
  for (FormKind k : {FormKind::gaussian, FormKind::indicator_ball, FormKind::indicator_cube,
                     FormKind::exp_euclidean_norm, FormKind::quadratic, FormKind::exp_p_norm})
    if (form_kind_name(k) == s) return k;
  throw input_error("unknown closed-form kind: " + s);
}

struct ClosedFormSpec {
  FormKind kind = FormKind::gaussian;
  std::vector<double> params;  // per kind: scale, exponent p, half-width
};

// Potential of the form coeff * ||x||_p^s, or the convex indicator of the
// lp-ball of a given radius. The family is closed under the Legendre and
// polarity transforms, which keeps closed-form functions exact through the
// whole pipeline. p = inf is the max norm.
struct NormPotential {
  double p = 2.0;
  double s = 2.0;
  double coeff = 0.5;
  bool indicator = false;
  double radius = 1.0;

  static NormPotential power(double p_, double s_, double c_) {
    NormPotential n;
    n.p = p_;
    n.s = s_;
    n.coeff = c_;
    if (!(n.p >= 1.0) || !(n.s >= 1.0) || !(n.coeff > 0.0))
      throw input_error("NormPotential: need p >= 1, s >= 1, coeff > 0");
    return n;
  }
  static NormPotential ball_indicator(double p_, double r_) {
    NormPotential n;
    n.indicator = true;
    n.p = p_;
    n.radius = r_;
    if (!(n.p >= 1.0) || !(n.radius > 0.0))
      throw input_error("NormPotential: need p >= 1, radius > 0");
    return n;
  }

  double norm(const Vec& x) const {
    if (p == kInf) return x.lpNorm<Eigen::Infinity>();
    if (p == 2.0) return x.norm();
    if (p == 1.0) return x.lpNorm<1>();
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]), p);
    return std::pow(acc, 1.0 / p);
  }

  double eval(const Vec& x) const {
    double r = norm(x);
    if (indicator) return r <= radius * (1.0 + 1e-14) ? 0.0 : kInf;
    return coeff * std::pow(r, s);
  }

  double dual_index() const {
    if (p == 1.0) return kInf;
    if (p == kInf) return 1.0;
    return p / (p - 1.0);
  }

  NormPotential legendre() const {
    if (indicator) return power(dual_index(), 1.0, radius);  // support function
    if (s == 1.0) return ball_indicator(dual_index(), coeff);
    double sp = s / (s - 1.0);
    double cp = (s - 1.0) / s * std::pow(coeff * s, -1.0 / (s - 1.0));
    return power(dual_index(), sp, cp);
  }

  NormPotential polar() const {
    if (indicator) return ball_indicator(dual_index(), 1.0 / radius);
    double kappa = s == 1.0 ? 1.0 : std::pow(s - 1.0, s - 1.0) / std::pow(s, s);
    return power(dual_index(), s, kappa / coeff);
  }

  // Volume of the unit lp-ball in dimension n.
  static double unit_ball_volume_p(int n, double p_) {
    if (p_ == kInf) return std::pow(2.0, n);
    return std::pow(2.0 * std::tgamma(1.0 + 1.0 / p_), n) / std::tgamma(1.0 + double(n) / p_);
  }
  // integral of x_1^2 over the unit lp-ball (Dirichlet integral)
  static double second_moment_integral_p(int n, double p_) {
    if (p_ == kInf) return std::pow(2.0, n) / 3.0;
    return std::pow(2.0 / p_, n) * std::tgamma(3.0 / p_) *
           std::pow(std::tgamma(1.0 / p_), n - 1) / std::tgamma(1.0 + double(n + 2) / p_);
  }
  // integral of r^m exp(-c r^s) over (0, inf)
  double radial_integral(int m) const {
    return std::tgamma((m + 1.0) / s) / (s * std::pow(coeff, (m + 1.0) / s));
  }

  double mass(int n) const {
    if (indicator) return unit_ball_volume_p(n, p) * std::pow(radius, n);
    return n * unit_ball_volume_p(n, p) * radial_integral(n - 1);
  }
  // Covariance is sigma^2 * I by the symmetries of the family.
  double covariance_scalar(int n) const {
    if (indicator)
      return second_moment_integral_p(n, p) / unit_ball_volume_p(n, p) * radius * radius;
    return (n + 2) * second_moment_integral_p(n, p) * radial_integral(n + 1) / mass(n);
  }
};

inline NormPotential backing_from_spec(const ClosedFormSpec& cf) {
  auto param = [&](std::size_t i, double dflt) {
    return cf.params.size() > i ? cf.params[i] : dflt;
  };
  switch (cf.kind) {
    case FormKind::gaussian: return NormPotential::power(2.0, 2.0, 0.5);
    case FormKind::quadratic: return NormPotential::power(2.0, 2.0, param(0, 1.0));
    case FormKind::exp_euclidean_norm: return NormPotential::power(2.0, 1.0, param(0, 1.0));
    case FormKind::exp_p_norm: {
      double c = param(0, 1.0), pp = param(1, 1.0);
      return NormPotential::power(pp, pp, c);  // sum of |x_i|^p scaled by c
    }
    case FormKind::indicator_ball: return NormPotential::ball_indicator(2.0, param(0, 1.0));
    case FormKind::indicator_cube: return NormPotential::ball_indicator(kInf, param(0, 1.0));
  }
  throw input_error("backing_from_spec: bad kind");
}

struct EnvelopeConstants {
  double A = 1.0;
  double B = 1.0;
};

// Geometric log-concave function f(x) = scalar * exp(-phi_b(S x + v)) with
// S = linear_map / dilation. All fields are immutable after construction;
// the named operations return modified copies.
class LogConcaveFunction {
 public:
  using GridBacking = std::shared_ptr<const GridPotential>;
  using Backing = std::variant<NormPotential, GridBacking>;

  LogConcaveFunction() = default;

  static LogConcaveFunction closed_form(const ClosedFormSpec& cf, int dim) {
    LogConcaveFunction f;
    f.dim_ = dim;
    f.backing_ = backing_from_spec(cf);
    f.spec_ = cf;
    f.lin_ = Mat::Identity(dim, dim);
    f.offset_ = Vec::Zero(dim);
    return f;
  }
  static LogConcaveFunction closed_form(FormKind kind, int dim, std::vector<double> params = {}) {
    return closed_form(ClosedFormSpec{kind, std::move(params)}, dim);
  }
  static LogConcaveFunction from_grid(GridPotential phi) {
    LogConcaveFunction f;
    f.dim_ = phi.grid.dim;
    f.backing_ = std::make_shared<const GridPotential>(std::move(phi));
    f.lin_ = Mat::Identity(f.dim_, f.dim_);
    f.offset_ = Vec::Zero(f.dim_);
    return f;
  }

  int dim() const { return dim_; }
  double dilation() const { return dilation_; }
  const Mat& linear_map() const { return lin_; }
  double scalar() const { return scalar_; }
  const Vec& offset() const { return offset_; }
  const Backing& backing() const { return backing_; }
  bool grid_backed() const { return std::holds_alternative<GridBacking>(backing_); }
  const GridPotential& grid() const { return *std::get<GridBacking>(backing_); }
  const std::optional<ClosedFormSpec>& spec() const { return spec_; }

  double backing_potential(const Vec& y) const {
    if (grid_backed()) return grid().interpolate(y);
    return std::get<NormPotential>(backing_).eval(y);
  }

  // phi_f(x); includes the -log(scalar) contribution
  double potential(const Vec& x) const {
    if (int(x.size()) != dim_) throw input_error("potential: dimension mismatch");
    Vec y = lin_ * x / dilation_ + offset_;
    return backing_potential(y) - std::log(scalar_);
  }

  double evaluate(const Vec& x) const {
    double phi = potential(x);
    return phi == kInf ? 0.0 : std::exp(-phi);
  }
  double operator()(const Vec& x) const { return evaluate(x); }

  LogConcaveFunction dilate(double t) const {
    if (!(t > 0.0)) throw input_error("dilate: t must be positive");
    LogConcaveFunction f(*this);
    f.dilation_ *= t;
    return f;
  }
  LogConcaveFunction apply_linear(const Mat& T, double condition_cap = 1e8) const {
    if (T.rows() != dim_ || T.cols() != dim_) throw input_error("apply_linear: T must be dim x dim");
    Eigen::JacobiSVD<Mat> svd(T);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0) || smax / smin > condition_cap)
      throw input_error("apply_linear: T singular or too ill-conditioned");
    LogConcaveFunction f(*this);
    f.lin_ = lin_ * T;
    return f;
  }
  LogConcaveFunction scale(double a) const {
    if (!(a > 0.0)) throw input_error("scale: a must be positive");
    LogConcaveFunction f(*this);
    f.scalar_ *= a;
    return f;
  }
  // f'(x) = f(x - tau)
  LogConcaveFunction translate(const Vec& tau) const {
    if (int(tau.size()) != dim_) throw input_error("translate: dimension mismatch");
    LogConcaveFunction f(*this);
    f.offset_ = offset_ - lin_ * tau / dilation_;
    return f;
  }
  // f'(x) = f(-x)
  LogConcaveFunction reflect() const {
    LogConcaveFunction f(*this);
    f.lin_ = -lin_;
    return f;
  }
  // copy with the backing replaced, metadata kept (transform composition)
  LogConcaveFunction with_backing(const NormPotential& np) const {
    LogConcaveFunction f(*this);
    f.backing_ = np;
    f.spec_.reset();
    return f;
  }

  Mat effective_matrix() const { return lin_ / dilation_; }

  bool geometric() const {
    if (std::abs(scalar_ - 1.0) > 1e-12) return false;
    return backing_potential(offset_) < 1e-9;
  }
  // even about the origin (sufficient conditions only)
  bool even() const {
    if (!grid_backed()) return offset_.lpNorm<Eigen::Infinity>() < 1e-12;
    const GridPotential& gp = grid();
    if (gp.grid.center.lpNorm<Eigen::Infinity>() > 1e-12 ||
        offset_.lpNorm<Eigen::Infinity>() > 1e-12)
      return false;
    std::size_t n = gp.values.size();
    for (std::size_t id = 0; id < n; ++id) {
      double a = gp.values[id], b = gp.values[n - 1 - id];
      if (a == kInf && b == kInf) continue;
      if (std::abs(a - b) > 1e-9) return false;
    }
    return true;
  }

  // location of the potential minimum
  Vec mode() const {
    Vec b0 = Vec::Zero(dim_);
    if (grid_backed()) b0 = grid().grid.node(grid().argmin_node());
    return effective_matrix().inverse() * (b0 - offset_);
  }

 private:
  int dim_ = 1;
  Backing backing_ = NormPotential{};
  std::optional<ClosedFormSpec> spec_;
  double dilation_ = 1.0;
  Mat lin_ = Mat::Identity(1, 1);
  double scalar_ = 1.0;
  Vec offset_ = Vec::Zero(1);
};

// Certified (A, B) with f(x) <= A exp(-B |x|) checked node-wise for grid
// backings and on ray probes (plus a tangent-line argument) for closed forms.
inline EnvelopeConstants envelope_constants(const LogConcaveFunction& f) {
  double A_b, B_b;
  if (!f.grid_backed()) {
    const NormPotential& np = std::get<NormPotential>(f.backing());
    if (np.indicator) {
      double beta = np.p >= 2.0 ? np.radius * std::pow(double(f.dim()), 0.5 - 1.0 / np.p)
                                : np.radius;
      B_b = 1.0;
      A_b = std::exp(B_b * beta);
    } else {
      double alpha = np.p <= 2.0 ? 1.0 : std::pow(double(f.dim()), 1.0 / np.p - 0.5);
      double ct = np.coeff * std::pow(alpha, np.s);
      if (np.s == 1.0) {
        B_b = ct;
        A_b = 1.0;
      } else {
        // tangent line to ct * r^s at r = 1 stays below the potential
        B_b = ct * np.s;
        A_b = std::exp(ct * (np.s - 1.0));
      }
    }
  } else {
    const GridPotential& gp = f.grid();
    const GridSpec& g = gp.grid;
    double min_ratio = kInf;
    double r_edge = 0.4 * g.halfwidth();
    for (std::size_t id = 0; id < gp.values.size(); ++id) {
      if (gp.values[id] == kInf) continue;
      Vec x = g.node(id);
      double r = (x - g.center).norm();
      if (r < r_edge) continue;
      min_ratio = std::min(min_ratio, gp.values[id] / r);
    }
    if (min_ratio == kInf) {
      // finite only near the center: bounded support, any B works
      B_b = 1.0;
    } else if (min_ratio <= 1e-9) {
      throw numeric_error("envelope_constants: no decay detected on grid boundary");
    } else {
      B_b = 0.9 * min_ratio;
    }
    double lnA = 0.0;
    for (std::size_t id = 0; id < gp.values.size(); ++id) {
      if (gp.values[id] == kInf) continue;
      Vec x = g.node(id);
      lnA = std::max(lnA, B_b * (x - g.center).norm() - gp.values[id]);
    }
    A_b = std::exp(lnA);
    // the grid is centered at g.center, not necessarily the origin
    A_b *= std::exp(B_b * g.center.norm());
  }
  // pull the bound through f(x) = scalar * f_b(S x + v)
  Mat S = f.effective_matrix();
  Eigen::JacobiSVD<Mat> svd(S);
  double smin = svd.singularValues().minCoeff();
  if (!(smin > 0.0)) throw numeric_error("envelope_constants: singular effective map");
  EnvelopeConstants env;
  env.B = B_b * smin;
  env.A = f.scalar() * A_b * std::exp(B_b * f.offset().norm());
  return env;
}

// Largest r with f(x0 + r u) >= floor along the ray; needs |u| = 1.
inline double decay_radius_along(const LogConcaveFunction& f, const Vec& x0, const Vec& u,
                                 double floor_value, const EnvelopeConstants& env) {
  double r_hi = (std::log(env.A) - std::log(floor_value)) / env.B + x0.norm() + 1.0;
  if (f.evaluate(x0 + r_hi * u) >= floor_value) return r_hi;
  auto pred = [&](double r) { return f.evaluate(x0 + r * u) >= floor_value; };
  if (!pred(0.0)) return 0.0;
  return bisect_last_true(pred, 0.0, r_hi, 1e-9);
}

// Axis-aligned box certain to contain {f >= floor}: probes radially over the
// +-1/0 direction stencil and caps with the envelope ball.
inline std::pair<Vec, Vec> support_box(const LogConcaveFunction& f, double floor_value) {
  EnvelopeConstants env = envelope_constants(f);
  Vec x0 = f.mode();
  int d = f.dim();
  Vec lo = x0, hi = x0;
  std::vector<Vec> dirs;
  int combos = 1;
  for (int a = 0; a < d; ++a) combos *= 3;
  for (int c = 1; c < combos; ++c) {
    Vec u = Vec::Zero(d);
    int t = c;
    for (int a = 0; a < d; ++a) {
      int s = t % 3;
      t /= 3;
      u[a] = s == 2 ? -1.0 : double(s);
    }
    if (u.norm() < 0.5) continue;
    dirs.push_back(u.normalized());
  }
  for (const Vec& u : dirs) {
    double r = decay_radius_along(f, x0, u, floor_value, env) * 1.05;
    for (int a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], x0[a] + r * u[a]);
      hi[a] = std::max(hi[a], x0[a] + r * u[a]);
    }
  }
  return {lo, hi};
}

// --- JSON closed-form format: {"kind", "params"} ----------------------------

inline nlohmann::ordered_json closed_form_to_json(const ClosedFormSpec& cf) {
  nlohmann::ordered_json j;
  j["kind"] = form_kind_name(cf.kind);
  j["params"] = cf.params;
  return j;
}

inline ClosedFormSpec closed_form_from_json(const nlohmann::json& j) {
  ClosedFormSpec cf;
  cf.kind = form_kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("params")) cf.params = j.at("params").get<std::vector<double>>();
  return cf;
}

}  // namespace lcgeo
