#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lcgeo/function.hpp"
#include "lcgeo/grid.hpp"
#include "lcgeo/util.hpp"

namespace lcgeo {

namespace detail {

// One-dimensional kernel: out[j] = max_i (xs[i] * ys[j] + w[i]) for sorted
// abscissae, skipping w = -inf. Linear time: the maximizer is a vertex of the
// upper hull of (xs, w) and moves monotonically with y.
inline void conjugate_line(const std::vector<double>& xs, const double* w, std::size_t wstride,
                           const std::vector<double>& ys, double* out, std::size_t ostride,
                           std::vector<int>& hull_scratch) {
  const int n = int(xs.size());
  auto& hull = hull_scratch;
  hull.clear();
  for (int i = 0; i < n; ++i) {
    double wi = w[i * wstride];
    if (wi == -kInf) continue;
    // keep hull such that (x, w) vertices see increasing slopes
    while (hull.size() >= 2) {
      int a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      double lhs = (w[std::size_t(b) * wstride] - w[std::size_t(a) * wstride]) * (xs[i] - xs[a]);
      double rhs = (wi - w[std::size_t(a) * wstride]) * (xs[b] - xs[a]);
      if (lhs > rhs) break;  // b stays above the chord a..i
      hull.pop_back();
    }
    hull.push_back(i);
  }
  const int m = int(ys.size());
  if (hull.empty()) {
    for (int j = 0; j < m; ++j) out[j * ostride] = -kInf;
    return;
  }
  int k = 0;
  for (int j = 0; j < m; ++j) {
    double y = ys[j];
    while (k + 1 < int(hull.size())) {
      int cur = hull[k], nxt = hull[k + 1];
      double vc = xs[cur] * y + w[std::size_t(cur) * wstride];
      double vn = xs[nxt] * y + w[std::size_t(nxt) * wstride];
      if (vn >= vc)
        ++k;
      else
        break;
    }
    int cur = hull[k];
    out[j * ostride] = xs[cur] * y + w[std::size_t(cur) * wstride];
  }
}

}  // namespace detail

struct LegendreInfo {
  bool dual_grid_small = false;  // dual extent below the active slope estimate
  double max_slope = 0.0;
};

// Largest finite one-sided difference quotient along the axes.
inline double max_finite_slope(const GridPotential& phi) {
  const GridSpec& g = phi.grid;
  double best = 0.0;
  for (std::size_t id = 0; id < phi.values.size(); ++id) {
    if (phi.values[id] == kInf) continue;
    auto ix = g.unravel(id);
    for (int a = 0; a < g.dim; ++a) {
      if (ix[a] + 1 >= g.points_per_axis) continue;
      auto jx = ix;
      jx[a] += 1;
      double v = phi.at(jx);
      if (v == kInf) continue;
      best = std::max(best, std::abs(v - phi.values[id]) / g.spacing);
    }
  }
  return best;
}

// (L phi)(y) = max over primal nodes x of <x,y> - phi(x), evaluated at every
// dual node. Computed axis by axis (an exact factorization of the lattice
// max), so the cost is linear in the node counts instead of quadratic.
inline GridPotential legendre(const GridPotential& phi, const GridSpec& dual,
                              LegendreInfo* info = nullptr) {
  const GridSpec& g = phi.grid;
  if (dual.dim != g.dim) throw input_error("legendre: dual grid dimension mismatch");
  if (info) {
    info->max_slope = max_finite_slope(phi);
    info->dual_grid_small =
        info->max_slope > 0.0 && dual.halfwidth() + 1e-12 < info->max_slope;
  }

  const int d = g.dim;
  std::array<int, 3> shape{1, 1, 1};
  for (int a = 0; a < d; ++a) shape[a] = g.points_per_axis;

  std::vector<double> cur(phi.values.size());
  for (std::size_t i = 0; i < cur.size(); ++i)
    cur[i] = phi.values[i] == kInf ? -kInf : -phi.values[i];

  std::vector<double> xs(g.points_per_axis), ys(dual.points_per_axis);
  for (int a = 0; a < d; ++a) {
    for (int i = 0; i < g.points_per_axis; ++i) xs[i] = g.coord(a, i);
    for (int j = 0; j < dual.points_per_axis; ++j) ys[j] = dual.coord(a, j);

    std::array<int, 3> oshape = shape;
    oshape[a] = dual.points_per_axis;
    std::vector<double> nxt(std::size_t(oshape[0]) * oshape[1] * oshape[2]);

    // strides of the contiguous row-major arrays
    std::size_t in_stride[3] = {std::size_t(shape[1]) * shape[2], std::size_t(shape[2]), 1};
    std::size_t out_stride[3] = {std::size_t(oshape[1]) * oshape[2], std::size_t(oshape[2]), 1};
    std::vector<int> scratch;
    for (int u = 0; u < (a == 0 ? 1 : shape[0]); ++u)
      for (int v0 = 0; v0 < (a <= 1 ? (a == 1 ? 1 : shape[1]) : shape[1]); ++v0)
        for (int w0 = 0; w0 < (a == 2 ? 1 : shape[2]); ++w0) {
          // iterate over all lines along axis a
          std::size_t in_base = 0, out_base = 0;
          int outer[3] = {u, v0, w0};
          for (int b = 0; b < 3; ++b) {
            if (b == a) continue;
            in_base += outer[b] * in_stride[b];
            out_base += outer[b] * out_stride[b];
          }
          detail::conjugate_line(xs, cur.data() + in_base, in_stride[a], ys,
                                 nxt.data() + out_base, out_stride[a], scratch);
        }
    cur.swap(nxt);
    shape = oshape;
  }
  for (double& v : cur)
    if (v == -kInf) v = kInf;  // empty effective domain along the line
  return GridPotential(dual, std::move(cur));
}

// Dim-1 fast path with the same hull sweep; kept as the documented linear-time
// kernel and required to match the exhaustive max to 1e-12.
inline GridPotential legendre_1d_fast(const GridPotential& phi, const GridSpec& dual,
                                      LegendreInfo* info = nullptr) {
  if (phi.grid.dim != 1) throw input_error("legendre_1d_fast: dim must be 1");
  return legendre(phi, dual, info);
}

// Primal/dual lattice pair for transform round trips.
struct DualGridPair {
  GridSpec primal;
  GridSpec dual;
};

// Dual lattice sized from the active slopes of phi (1.25 margin). Indicator
// potentials have no finite slope; the extent is then chosen so that the dual
// potential reaches `target_level` at the boundary.
inline GridSpec suggest_dual_grid(const GridPotential& phi, int points,
                                  double target_level = 40.0) {
  double slope = max_finite_slope(phi);
  double extent;
  if (slope > 1e-9) {
    extent = 1.25 * slope;
  } else {
    // support-function growth: level / (inner radius of the finite region)
    double rmin = kInf;
    const GridSpec& g = phi.grid;
    for (std::size_t id = 0; id < phi.values.size(); ++id) {
      if (phi.values[id] != kInf) continue;
      double r = (g.node(id) - g.center).norm();
      rmin = std::min(rmin, r);
    }
    extent = rmin == kInf ? 1.0 : target_level / std::max(rmin - g.spacing, g.spacing);
  }
  return GridSpec(phi.grid.dim, points, 2.0 * extent / (points - 1));
}

// Pointwise polarity transform against the lattice nodes of phi:
//   phi°(x) = sup over nodes y with phi(y) > 0 of (<x,y> - 1) / phi(y),
// +inf when some node with phi(y) = 0 has <x,y> > 1, clamped below at 0.
inline double polar_value(const GridPotential& phi, const Vec& x) {
  const GridSpec& g = phi.grid;
  double best = 0.0;
  const std::size_t N = g.node_count();
  for (std::size_t id = 0; id < N; ++id) {
    double pv = phi.values[id];
    if (pv == kInf) continue;
    double dot = 0.0;
    auto ix = g.unravel(id);
    for (int a = 0; a < g.dim; ++a) dot += g.coord(a, ix[a]) * x[a];
    if (pv <= 0.0) {
      if (dot > 1.0) return kInf;
      continue;
    }
    best = std::max(best, (dot - 1.0) / pv);
  }
  return best;
}

inline GridPotential polar_transform(const GridPotential& phi, const GridSpec& dual) {
  if (dual.dim != phi.grid.dim) throw input_error("polar_transform: dual grid mismatch");
  std::vector<double> out(dual.node_count());
  parallel_for(out.size(), [&](std::size_t id) { out[id] = polar_value(phi, dual.node(id)); });
  return GridPotential(dual, std::move(out));
}

// Samples the potential of f on the given lattice (with convexity repair),
// producing a plain grid-backed copy.
inline LogConcaveFunction resample_to_grid(const LogConcaveFunction& f, const GridSpec& g) {
  GridPotential phi = GridPotential::sample(g, [&](const Vec& x) { return f.potential(x); });
  return LogConcaveFunction::from_grid(make_geometric(convex_repair(phi)));
}

inline GridSpec default_potential_grid(const LogConcaveFunction& f, int points = 0) {
  if (points == 0) points = f.dim() == 1 ? 257 : (f.dim() == 2 ? 129 : 33);
  auto [lo, hi] = support_box(f, 1e-12);
  double halfwidth = std::max(lo.cwiseAbs().maxCoeff(), hi.cwiseAbs().maxCoeff());
  return GridSpec(f.dim(), points, 2.0 * halfwidth / (points - 1));
}

namespace detail {

inline bool analytic_transformable(const LogConcaveFunction& f) {
  return !f.grid_backed() && std::abs(f.scalar() - 1.0) < 1e-12 &&
         f.offset().lpNorm<Eigen::Infinity>() < 1e-14;
}

}  // namespace detail

// f* = exp(-L phi). Closed forms stay closed forms; grid-backed inputs go
// through the lattice transform on an auto-sized dual grid.
inline LogConcaveFunction legendre_dual(const LogConcaveFunction& f) {
  if (!f.geometric()) throw input_error("legendre_dual: f must be geometric");
  if (detail::analytic_transformable(f)) {
    // phi_f = phi_b o S  =>  L phi_f = (L phi_b) o S^{-T}
    const auto& b = std::get<NormPotential>(f.backing());
    Mat S = f.effective_matrix();
    LogConcaveFunction out = LogConcaveFunction::closed_form(ClosedFormSpec{}, f.dim());
    out = out.apply_linear(S.inverse().transpose());
    return out.with_backing(b.legendre());
  }
  LogConcaveFunction fg =
      f.grid_backed() && f.effective_matrix().isIdentity(1e-14) &&
              f.offset().lpNorm<Eigen::Infinity>() < 1e-14
          ? f
          : resample_to_grid(f, default_potential_grid(f));
  const GridPotential& phi = fg.grid();
  GridSpec dual = suggest_dual_grid(phi, phi.grid.points_per_axis);
  return LogConcaveFunction::from_grid(legendre(phi, dual));
}

// f_A = exp(-outer * phi°(x / inner)); defaults are the scaled polar with
// outer = (50 n)^2 and inner = n.
inline LogConcaveFunction scaled_polar(const LogConcaveFunction& f, int n, double outer = -1.0,
                                       double inner = -1.0) {
  if (n != f.dim()) throw input_error("scaled_polar: n must equal the dimension");
  if (!f.geometric()) throw input_error("scaled_polar: f must be geometric");
  if (outer <= 0.0) outer = (50.0 * n) * (50.0 * n);
  if (inner <= 0.0) inner = double(n);
  if (detail::analytic_transformable(f)) {
    const auto& b = std::get<NormPotential>(f.backing());
    NormPotential bp = b.polar();
    if (!bp.indicator) bp.coeff *= outer;
    Mat S = f.effective_matrix();
    LogConcaveFunction out = LogConcaveFunction::closed_form(ClosedFormSpec{}, f.dim());
    out = out.apply_linear(S.inverse().transpose() / inner);
    return out.with_backing(bp);
  }
  LogConcaveFunction fg =
      f.grid_backed() && f.effective_matrix().isIdentity(1e-14) &&
              f.offset().lpNorm<Eigen::Infinity>() < 1e-14
          ? f
          : resample_to_grid(f, default_potential_grid(f));
  const GridPotential& phi = fg.grid();
  GridSpec zdual = suggest_dual_grid(phi, phi.grid.points_per_axis);
  GridPotential pol = polar_transform(phi, zdual);
  // rescale: phi_A on the x-lattice (x = inner * z) with values outer * phi°
  GridSpec xgrid(zdual.dim, zdual.points_per_axis, zdual.spacing * inner);
  std::vector<double> vals(pol.values);
  for (double& v : vals)
    if (v != kInf) v *= outer;
  return LogConcaveFunction::from_grid(GridPotential(xgrid, std::move(vals)));
}

}  // namespace lcgeo
