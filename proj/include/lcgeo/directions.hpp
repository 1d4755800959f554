#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lcgeo/util.hpp"

namespace lcgeo {

// Unit directions with quadrature weights for the uniform sphere measure.
// dim 1: {+1, -1}; dim 2: equispaced angles; dim 3: Fibonacci-sphere nodes.
struct DirectionSet {
  int dim = 1;
  Mat dirs;     // m x dim, rows are unit vectors
  Vec weights;  // non-negative, sums to 1

  int count() const { return int(dirs.rows()); }
  Vec dir(int i) const { return dirs.row(i).transpose(); }

  void validate() const {
    for (int i = 0; i < count(); ++i)
      if (std::abs(dirs.row(i).norm() - 1.0) > 1e-12)
        throw input_error("DirectionSet: direction not unit length");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
      throw input_error("DirectionSet: weights do not sum to 1");
  }
};

inline int default_direction_count(int dim) { return dim == 1 ? 2 : dim == 2 ? 720 : 2048; }

inline std::shared_ptr<const DirectionSet> make_direction_set(int dim, int m = 0) {
  if (m == 0) m = default_direction_count(dim);
  auto ds = std::make_shared<DirectionSet>();
  ds->dim = dim;
  if (dim == 1) {
    ds->dirs = Mat(2, 1);
    ds->dirs << 1.0, -1.0;
    ds->weights = Vec::Constant(2, 0.5);
  } else if (dim == 2) {
    ds->dirs = Mat(m, 2);
    for (int k = 0; k < m; ++k) {
      double th = 2.0 * M_PI * k / m;
      ds->dirs(k, 0) = std::cos(th);
      ds->dirs(k, 1) = std::sin(th);
    }
    ds->weights = Vec::Constant(m, 1.0 / m);
  } else if (dim == 3) {
    // Fibonacci sphere
    ds->dirs = Mat(m, 3);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < m; ++k) {
      double z = 1.0 - (2.0 * k + 1.0) / m;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double th = golden * k;
      ds->dirs(k, 0) = r * std::cos(th);
      ds->dirs(k, 1) = r * std::sin(th);
      ds->dirs(k, 2) = z;
    }
    // renormalize rows against rounding
    for (int k = 0; k < m; ++k) ds->dirs.row(k) /= ds->dirs.row(k).norm();
    ds->weights = Vec::Constant(m, 1.0 / m);
  } else {
    throw input_error("make_direction_set: dim must be 1..3");
  }
  ds->validate();
  return ds;
}

inline int nearest_direction(const DirectionSet& ds, const Vec& u) {
  int best = 0;
  double bd = -2.0;
  for (int i = 0; i < ds.count(); ++i) {
    double d = ds.dirs.row(i).dot(u);
    if (d > bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

// Uniform point on S^{n-1} via Gaussian normalization.
inline Vec uniform_sphere_sample(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec u(dim);
  for (;;) {
    for (int a = 0; a < dim; ++a) u[a] = nd(rng);
    double n = u.norm();
    if (n > 1e-12) return u / n;
  }
}

// Interpolates per-direction samples at an arbitrary unit direction.
// dim 1: exact lookup; dim 2: angular-linear between neighbours; dim 3:
// barycentric on the spherical triangle of a local fan around the nearest
// Fibonacci node.
inline double interpolate_directional(const DirectionSet& ds, const Vec& values, const Vec& u) {
  if (ds.dim == 1) return u[0] > 0.0 ? values[0] : values[1];
  if (ds.dim == 2) {
    int m = ds.count();
    double th = std::atan2(u[1], u[0]);
    if (th < 0.0) th += 2.0 * M_PI;
    double pos = th * m / (2.0 * M_PI);
    int k0 = int(std::floor(pos)) % m;
    int k1 = (k0 + 1) % m;
    double t = pos - std::floor(pos);
    return (1.0 - t) * values[k0] + t * values[k1];
  }
  // dim 3: collect nearby nodes, pick the fan triangle containing u
  int c = nearest_direction(ds, u);
  Vec vc = ds.dir(c);
  if (vc.dot(u) > 1.0 - 1e-14) return values[c];
  // candidate neighbours: the closest nodes other than c
  const int kNeighbours = 8;
  std::vector<std::pair<double, int>> near;
  near.reserve(ds.count());
  for (int i = 0; i < ds.count(); ++i) {
    if (i == c) continue;
    near.push_back({-ds.dirs.row(i).dot(vc), i});
  }
  std::partial_sort(near.begin(), near.begin() + kNeighbours, near.end());
  // walk fan triangles (c, n_i, n_j) and solve u = a*vc + b*vi + g*vj
  double best_min = -kInf;
  double result = values[c];
  for (int i = 0; i < kNeighbours; ++i)
    for (int j = i + 1; j < kNeighbours; ++j) {
      Mat T(3, 3);
      T.col(0) = vc;
      T.col(1) = ds.dir(near[i].second);
      T.col(2) = ds.dir(near[j].second);
      Eigen::FullPivLU<Mat> lu(T);
      if (!lu.isInvertible()) continue;
      Vec bary = lu.solve(u);
      double mn = bary.minCoeff();
      if (mn > best_min) {
        best_min = mn;
        double s = bary.sum();
        if (s <= 1e-12) continue;
        bary /= s;
        result = bary[0] * values[c] + bary[1] * values[near[i].second] +
                 bary[2] * values[near[j].second];
      }
      if (best_min >= 0.0 && mn >= 0.0) break;
    }
  return result;
}

}  // namespace lcgeo
