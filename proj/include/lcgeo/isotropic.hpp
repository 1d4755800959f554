#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <json.hpp>

#include "lcgeo/bodies.hpp"
#include "lcgeo/function.hpp"
#include "lcgeo/grid.hpp"
#include "lcgeo/util.hpp"

namespace lcgeo {

struct MomentReport {
  double mass = 0.0;
  Vec barycenter;
  Mat covariance;
  double quadrature_error = 0.0;  // zero for closed forms
};

namespace detail {

struct RawMoments {
  double mass = 0.0;
  Vec bar;
  Mat second;  // E[x x^T] * mass
};

inline RawMoments grid_raw_moments(const GridPotential& gp, int stride) {
  const GridSpec& g = gp.grid;
  int d = g.dim;
  RawMoments rm;
  rm.bar = Vec::Zero(d);
  rm.second = Mat::Zero(d, d);
  double cell = std::pow(g.spacing * stride, d);
  const int P = g.points_per_axis;
  std::array<int, 3> lim{P, 1, 1};
  if (d >= 2) lim[1] = P;
  if (d == 3) lim[2] = P;
  for (int i0 = 0; i0 < lim[0]; i0 += stride)
    for (int i1 = 0; i1 < lim[1]; i1 += stride)
      for (int i2 = 0; i2 < lim[2]; i2 += stride) {
        std::array<int, 3> ix{i0, i1, i2};
        double v = gp.values[g.linear(ix)];
        if (v == kInf) continue;
        double f = std::exp(-v);
        double w = 1.0;
        int idx3[3] = {i0, i1, i2};
        for (int a = 0; a < d; ++a)
          if (idx3[a] == 0 || idx3[a] == P - 1) w *= 0.5;
        double m = w * f * cell;
        Vec x(d);
        for (int a = 0; a < d; ++a) x[a] = g.coord(a, idx3[a]);
        rm.mass += m;
        rm.bar += m * x;
        rm.second += m * x * x.transpose();
      }
  return rm;
}

inline void check_integrable_on_hull(const GridPotential& gp) {
  const GridSpec& g = gp.grid;
  double min_phi = gp.min_value();
  double min_boundary = kInf;
  const int P = g.points_per_axis;
  for (std::size_t id = 0; id < gp.values.size(); ++id) {
    auto ix = g.unravel(id);
    bool boundary = false;
    for (int a = 0; a < g.dim; ++a)
      if (ix[a] == 0 || ix[a] == P - 1) boundary = true;
    if (boundary) min_boundary = std::min(min_boundary, gp.values[id]);
  }
  // boundary values of f must sit below 1e-12 of the max
  if (std::exp(-(min_boundary - min_phi)) > 1e-12)
    throw input_error("moments: f does not decay below 1e-12 on the lattice hull");
}

}  // namespace detail

// Mass, barycenter, covariance. Closed forms use the exact formulas of the
// norm-power family; grid backings use tensor-product trapezoidal quadrature
// with a grid-halving error estimate. Both are pulled through the affine
// metadata f(x) = scalar * b(S x + v).
inline MomentReport moments(const LogConcaveFunction& f) {
  int d = f.dim();
  double mass_b;
  Vec bar_b = Vec::Zero(d);
  Mat cov_b;
  double qerr = 0.0;
  if (!f.grid_backed()) {
    const auto& np = std::get<NormPotential>(f.backing());
    mass_b = np.mass(d);
    cov_b = np.covariance_scalar(d) * Mat::Identity(d, d);
  } else {
    const GridPotential& gp = f.grid();
    detail::check_integrable_on_hull(gp);
    auto full = detail::grid_raw_moments(gp, 1);
    if (!(full.mass > 0.0)) throw input_error("moments: vanishing mass on the grid");
    mass_b = full.mass;
    bar_b = full.bar / full.mass;
    cov_b = full.second / full.mass - bar_b * bar_b.transpose();
    if ((gp.grid.points_per_axis - 1) % 4 == 0) {
      auto half = detail::grid_raw_moments(gp, 2);
      Vec bar_h = half.bar / half.mass;
      Mat cov_h = half.second / half.mass - bar_h * bar_h.transpose();
      qerr = std::abs(half.mass - full.mass) / full.mass;
      qerr = std::max(qerr, (cov_h - cov_b).cwiseAbs().maxCoeff());
      qerr = std::max(qerr, (bar_h - bar_b).cwiseAbs().maxCoeff());
    }
  }
  Mat S = f.effective_matrix();
  Mat Sinv = S.inverse();
  MomentReport out;
  out.mass = f.scalar() * mass_b / std::abs(S.determinant());
  out.barycenter = Sinv * (bar_b - f.offset());
  out.covariance = Sinv * cov_b * Sinv.transpose();
  out.quadrature_error = qerr;
  if (!(out.mass > 0.0) || !std::isfinite(out.mass))
    throw input_error("moments: f is not integrable");
  return out;
}

inline double sup_norm(const LogConcaveFunction& f) {
  double min_b = f.grid_backed() ? f.grid().min_value() : 0.0;
  return f.scalar() * std::exp(-min_b);
}

// L_f = (||f||_inf / int f)^{1/n} det(Cov f)^{1/(2n)}
inline double isotropic_constant(const LogConcaveFunction& f, const MomentReport* pre = nullptr) {
  MomentReport m = pre ? *pre : moments(f);
  int n = f.dim();
  double det = m.covariance.determinant();
  if (!(det > 0.0)) throw input_error("isotropic_constant: degenerate covariance");
  return std::pow(sup_norm(f) / m.mass, 1.0 / n) * std::pow(det, 0.5 / n);
}

struct IsotropizationRecord {
  Mat T;                          // whitening map (f1 = f o T)
  double a = 1.0;                 // final rescale lambda_{f1} / L_f
  double sup_norm_divisor = 1.0;  // the ||f1||_inf division
  Vec translation;                // automatic re-centering shift, if any
};

// Three-step normalization: whiten to Cov = L^2 I, divide by the sup norm,
// rescale by a = lambda_{f1} / L_f. The whitening T = Cov^{1/2} / L_f makes
// lambda_{f1} = L_f, so a = 1 and already-isotropic inputs get T = I.
inline std::pair<LogConcaveFunction, IsotropizationRecord> isotropize(
    const LogConcaveFunction& f) {
  int n = f.dim();
  IsotropizationRecord rec;
  rec.translation = Vec::Zero(n);
  LogConcaveFunction fc = f;
  MomentReport m = moments(f);
  if (m.barycenter.norm() > 1e-6) {
    rec.translation = m.barycenter;
    fc = f.translate(-m.barycenter);
    m = moments(fc);
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(m.covariance);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
    throw input_error("isotropize: degenerate covariance");
  double L = isotropic_constant(fc, &m);
  Mat sqrt_cov = eig.eigenvectors() *
                 eig.eigenvalues().cwiseSqrt().asDiagonal() *
                 eig.eigenvectors().transpose();
  rec.T = sqrt_cov / L;
  LogConcaveFunction f1 = fc.apply_linear(rec.T);
  rec.sup_norm_divisor = sup_norm(f1);
  LogConcaveFunction f2 = f1.scale(1.0 / rec.sup_norm_divisor);
  rec.a = 1.0;  // lambda_{f1} = L_f by the normalization of T
  LogConcaveFunction f3 = f2.dilate(1.0 / rec.a);
  return {f3, rec};
}

// Moments of the uniform measure on a star body, from its radial samples.
struct BodyMoments {
  double volume = 0.0;
  Vec barycenter;
  Mat covariance;
};

inline BodyMoments body_moments(const RadialBody& K) {
  int n = K.dim();
  BodyMoments bm;
  bm.barycenter = Vec::Zero(n);
  bm.covariance = Mat::Zero(n, n);
  double wn = unit_ball_volume(n);
  double v0 = 0.0;
  Vec m1 = Vec::Zero(n);
  Mat m2 = Mat::Zero(n, n);
  for (int i = 0; i < K.dirs->count(); ++i) {
    Vec u = K.dirs->dir(i);
    double w = K.dirs->weights[i];
    v0 += w * std::pow(K.rho[i], n);
    m1 += w * std::pow(K.rho[i], n + 1) * u;
    m2 += w * std::pow(K.rho[i], n + 2) * u * u.transpose();
  }
  bm.volume = wn * v0;
  // surface-measure normalization: dS = n * wn * dsigma
  Vec first = (n * wn / (n + 1.0)) * m1;
  Mat second = (n * wn / (n + 2.0)) * m2;
  bm.barycenter = first / bm.volume;
  bm.covariance = second / bm.volume - bm.barycenter * bm.barycenter.transpose();
  return bm;
}

// Measured almost-isotropy constant of a convex body: the volume-normalized
// whitening map T of the uniform measure satisfies a^{-1} B ⊆ T(B) ⊆ a B
// with a = max(||T||, ||T^{-1}||).
inline double almost_isotropic_gap(const RadialBody& K) {
  BodyMoments bm = body_moments(K);
  if (!(bm.volume > 0.0)) throw input_error("almost_isotropic_gap: empty body");
  Eigen::SelfAdjointEigenSolver<Mat> eig(bm.covariance);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
    throw input_error("almost_isotropic_gap: degenerate covariance");
  int n = K.dim();
  Mat W = eig.eigenvectors() *
          eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
          eig.eigenvectors().transpose();
  double c = std::pow(W.determinant() * bm.volume, -1.0 / n);
  Mat T = c * W;
  Eigen::JacobiSVD<Mat> svd(T);
  double smax = svd.singularValues().maxCoeff();
  double smin = svd.singularValues().minCoeff();
  return std::max(smax, 1.0 / smin);
}

// isotropy predicates used by the body <-> indicator correspondence checks
inline bool is_isotropic_function(const LogConcaveFunction& f, double tol = 1e-6) {
  MomentReport m = moments(f);
  if (std::abs(m.mass - 1.0) > tol) return false;
  if (m.barycenter.lpNorm<Eigen::Infinity>() > tol) return false;
  double lambda = m.covariance.trace() / f.dim();
  return (m.covariance - lambda * Mat::Identity(f.dim(), f.dim())).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_isotropic_body(const RadialBody& K, double tol = 1e-6) {
  BodyMoments bm = body_moments(K);
  if (std::abs(bm.volume - 1.0) > tol) return false;
  if (bm.barycenter.lpNorm<Eigen::Infinity>() > tol) return false;
  double lambda = bm.covariance.trace() / K.dim();
  return (bm.covariance - lambda * Mat::Identity(K.dim(), K.dim())).cwiseAbs().maxCoeff() <= tol;
}

inline nlohmann::ordered_json isotropization_to_json(const IsotropizationRecord& rec) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < rec.T.rows(); ++i) {
    std::vector<double> row(rec.T.cols());
    for (int k = 0; k < rec.T.cols(); ++k) row[k] = rec.T(i, k);
    rows.push_back(row);
  }
  j["T"] = std::move(rows);
  j["a"] = rec.a;
  j["sup_norm_divisor"] = rec.sup_norm_divisor;
  j["translation"] =
      std::vector<double>(rec.translation.data(), rec.translation.data() + rec.translation.size());
  return j;
}

inline IsotropizationRecord isotropization_from_json(const nlohmann::json& j) {
  IsotropizationRecord rec;
  auto rows = j.at("T").get<std::vector<std::vector<double>>>();
  int n = int(rows.size());
  rec.T = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) rec.T(i, k) = rows[i][k];
  rec.a = j.at("a").get<double>();
  rec.sup_norm_divisor = j.at("sup_norm_divisor").get<double>();
  auto tr = j.at("translation").get<std::vector<double>>();
  rec.translation = Eigen::Map<const Vec>(tr.data(), long(tr.size()));
  return rec;
}

}  // namespace lcgeo
