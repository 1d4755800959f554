#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lcgeo/util.hpp"

namespace lcgeo {

// Uniform lattice, symmetric about `center` (points_per_axis is odd).
struct GridSpec {
  int dim = 1;
  int points_per_axis = 257;
  double spacing = 0.05;
  Vec center;

  GridSpec() = default;
  GridSpec(int d, int p, double h, Vec c = Vec()) : dim(d), points_per_axis(p), spacing(h) {
    center = c.size() == d ? c : Vec::Zero(d);
    validate();
  }

  static GridSpec centered(int d, int p, double halfwidth) {
    return GridSpec(d, p, 2.0 * halfwidth / (p - 1));
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw input_error("GridSpec: dim must be 1..3");
    if (points_per_axis < 3 || points_per_axis % 2 == 0)
      throw input_error("GridSpec: points_per_axis must be odd and >= 3");
    if (!(spacing > 0.0)) throw input_error("GridSpec: spacing must be positive");
    if (center.size() != dim) throw input_error("GridSpec: center size != dim");
    if (node_count() > (std::size_t(1) << 24))
      throw input_error("GridSpec: lattice exceeds memory budget");
  }

  int half() const { return (points_per_axis - 1) / 2; }
  double halfwidth() const { return half() * spacing; }
  std::size_t node_count() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= std::size_t(points_per_axis);
    return n;
  }
  double coord(int axis, int i) const { return center[axis] + (i - half()) * spacing; }

  std::size_t linear(const std::array<int, 3>& ix) const {
    std::size_t id = 0;
    for (int a = 0; a < dim; ++a) id = id * points_per_axis + ix[a];
    return id;
  }
  std::array<int, 3> unravel(std::size_t id) const {
    std::array<int, 3> ix{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
      ix[a] = int(id % points_per_axis);
      id /= points_per_axis;
    }
    return ix;
  }
  Vec node(std::size_t id) const {
    auto ix = unravel(id);
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = coord(a, ix[a]);
    return x;
  }
  bool same_lattice(const GridSpec& o) const {
    return dim == o.dim && points_per_axis == o.points_per_axis &&
           std::abs(spacing - o.spacing) < 1e-15 &&
           (center - o.center).lpNorm<Eigen::Infinity>() < 1e-15;
  }
  bool contains(const Vec& x) const {
    for (int a = 0; a < dim; ++a)
      if (std::abs(x[a] - center[a]) > halfwidth() + 1e-12 * spacing) return false;
    return true;
  }
};

// Convex potential sampled on a lattice. Values live in [min, +inf]; +inf marks
// nodes outside the effective domain. The origin node must stay finite.
struct GridPotential {
  GridSpec grid;
  std::vector<double> values;

  GridPotential() = default;
  GridPotential(GridSpec g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.node_count())
      throw input_error("GridPotential: value count does not match lattice");
    for (double t : values)
      if (!valid_extended(t)) throw input_error("GridPotential: values must be > -inf and not NaN");
  }

  template <typename F>
  static GridPotential sample(const GridSpec& g, F&& phi) {
    std::vector<double> v(g.node_count());
    for (std::size_t id = 0; id < v.size(); ++id) v[id] = phi(g.node(id));
    return GridPotential(g, std::move(v));
  }

  double at(const std::array<int, 3>& ix) const { return values[grid.linear(ix)]; }

  std::size_t argmin_node() const {
    std::size_t best = 0;
    for (std::size_t id = 1; id < values.size(); ++id)
      if (values[id] < values[best]) best = id;
    return best;
  }
  double min_value() const { return values[argmin_node()]; }

  // Multilinear interpolation. Any cell with an infinite corner interpolates
  // to +inf; points outside the hull are +inf.
  double interpolate(const Vec& x) const {
    if (int(x.size()) != grid.dim) throw input_error("interpolate: dimension mismatch");
    double fi[3];
    int base[3] = {0, 0, 0};
    for (int a = 0; a < grid.dim; ++a) {
      double s = (x[a] - grid.center[a]) / grid.spacing + grid.half();
      if (s < -1e-9 || s > grid.points_per_axis - 1 + 1e-9) return kInf;
      s = std::clamp(s, 0.0, double(grid.points_per_axis - 1));
      int i0 = std::min(int(std::floor(s)), grid.points_per_axis - 2);
      base[a] = i0;
      fi[a] = s - i0;
    }
    double acc = 0.0;
    int corners = 1 << grid.dim;
    for (int cbit = 0; cbit < corners; ++cbit) {
      double w = 1.0;
      std::array<int, 3> ix{0, 0, 0};
      for (int a = 0; a < grid.dim; ++a) {
        int up = (cbit >> a) & 1;
        ix[a] = base[a] + up;
        w *= up ? fi[a] : 1.0 - fi[a];
      }
      double v = at(ix);
      if (v == kInf) {
        if (w > 0.0) return kInf;
        continue;  // weight-zero infinite corner does not poison the cell edge
      }
      acc += w * v;
    }
    return acc;
  }
};

// Subtracts the minimum so min(phi) = 0. The argmin must sit within one cell
// of the lattice origin; callers must recenter first otherwise.
inline GridPotential make_geometric(const GridPotential& phi) {
  const GridSpec& g = phi.grid;
  std::array<int, 3> origin{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) origin[a] = g.half();
  if (phi.at(origin) == kInf) throw input_error("make_geometric: phi(center) must be finite");
  std::size_t am = phi.argmin_node();
  auto ix = g.unravel(am);
  for (int a = 0; a < g.dim; ++a)
    if (std::abs(ix[a] - g.half()) > 1)
      throw numeric_error("make_geometric: argmin farther than one cell from origin");
  double m = phi.values[am];
  std::vector<double> v(phi.values);
  for (double& t : v)
    if (t != kInf) t -= m;
  return GridPotential(g, std::move(v));
}

namespace detail {

// Lower convex envelope of samples (t_k, v_k) along a line, t_k equally
// spaced. Infinite samples impose no constraint; abscissae between finite
// samples get the hull value (convex domains are intervals along lines).
inline void line_convex_envelope(std::vector<double>& v) {
  const int n = int(v.size());
  int lo = -1, hi = -1;
  for (int i = 0; i < n; ++i)
    if (v[i] != kInf) {
      if (lo < 0) lo = i;
      hi = i;
    }
  if (lo < 0 || hi - lo < 1) return;
  // monotone chain over (index, value) pairs of finite samples
  std::vector<int> hull;
  for (int i = lo; i <= hi; ++i) {
    if (v[i] == kInf) continue;
    while (hull.size() >= 2) {
      int a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      // keep if b lies strictly below segment a..i
      double cross = (v[b] - v[a]) * (i - a) - (v[i] - v[a]) * (b - a);
      if (cross < 0.0) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    int a = hull[k], b = hull[k + 1];
    for (int i = a; i <= b; ++i) {
      double t = double(i - a) / double(b - a);
      v[i] = v[a] + t * (v[b] - v[a]);
    }
  }
}

inline std::vector<std::array<int, 3>> sweep_directions(int dim) {
  std::vector<std::array<int, 3>> dirs;
  for (int a = 0; a < dim; ++a) {
    std::array<int, 3> d{0, 0, 0};
    d[a] = 1;
    dirs.push_back(d);
  }
  if (dim >= 2) {
    if (dim == 2) {
      dirs.push_back({1, 1, 0});
      dirs.push_back({1, -1, 0});
    } else {
      for (int s : {1, -1}) {
        dirs.push_back({1, s, 0});
        dirs.push_back({1, 0, s});
        dirs.push_back({0, 1, s});
      }
      for (int s1 : {1, -1})
        for (int s2 : {1, -1}) dirs.push_back({1, s1, s2});
    }
  }
  return dirs;
}

}  // namespace detail

// Replaces values by the discrete lower convex envelope along axis lines and
// lattice diagonals, sweeping until the values stop changing. The result is
// convex along every line of the sweep stencil and is what downstream code
// treats as the convex input.
inline GridPotential convex_repair(const GridPotential& phi, int max_sweeps = 64) {
  const GridSpec& g = phi.grid;
  std::vector<double> v(phi.values);
  const int P = g.points_per_axis;
  auto dirs = detail::sweep_directions(g.dim);
  for (int pass = 0; pass < max_sweeps; ++pass) {
    std::vector<double> before(v);
    for (const auto& d : dirs) {
      // enumerate all lattice lines in direction d
      std::array<int, 3> lim{P, P, P};
      for (int a = g.dim; a < 3; ++a) lim[a] = 1;
      std::vector<double> line;
      std::vector<std::size_t> ids;
      for (int i0 = 0; i0 < lim[0]; ++i0)
        for (int i1 = 0; i1 < lim[1]; ++i1)
          for (int i2 = 0; i2 < lim[2]; ++i2) {
            std::array<int, 3> s{i0, i1, i2};
            bool is_start = false;  // line starts where stepping backwards leaves the lattice
            for (int a = 0; a < g.dim; ++a) {
              int prev = s[a] - d[a];
              if (d[a] != 0 && (prev < 0 || prev >= P)) is_start = true;
            }
            if (!is_start) continue;
            line.clear();
            ids.clear();
            std::array<int, 3> cur = s;
            while (true) {
              bool in = true;
              for (int a = 0; a < g.dim; ++a)
                if (cur[a] < 0 || cur[a] >= P) in = false;
              if (!in) break;
              std::size_t id = g.linear(cur);
              ids.push_back(id);
              line.push_back(v[id]);
              for (int a = 0; a < g.dim; ++a) cur[a] += d[a];
            }
            if (line.size() < 3) continue;
            detail::line_convex_envelope(line);
            for (std::size_t k = 0; k < ids.size(); ++k) v[ids[k]] = line[k];
          }
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (before[i] != kInf || v[i] != kInf)
        delta = std::max(delta, std::abs(std::min(before[i], 1e300) - std::min(v[i], 1e300)));
    if (delta <= 1e-13) break;
  }
  return GridPotential(g, std::move(v));
}

// (phi [] psi)(x) = min over lattice nodes y of phi(y) + psi(x - y),
// x - y interpolated on psi's lattice (and +inf outside it). Exhaustive O(N^2).
inline GridPotential inf_convolution(const GridPotential& phi, const GridPotential& psi) {
  if (!phi.grid.same_lattice(psi.grid)) throw input_error("inf_convolution: grid mismatch");
  const GridSpec& g = phi.grid;
  const std::size_t N = g.node_count();
  std::vector<Vec> nodes(N);
  for (std::size_t id = 0; id < N; ++id) nodes[id] = g.node(id);
  std::vector<double> out(N, kInf);
  parallel_for(N, [&](std::size_t ix) {
    double best = kInf;
    const Vec& x = nodes[ix];
    for (std::size_t iy = 0; iy < N; ++iy) {
      double a = phi.values[iy];
      if (a >= best) continue;
      double b = psi.interpolate(x - nodes[iy]);
      if (a + b < best) best = a + b;
    }
    out[ix] = best;
  });
  return GridPotential(g, std::move(out));
}

// --- JSON grid file format -------------------------------------------------
// {"dim", "points_per_axis", "spacing", "center", "values": row-major,
//  with the string "inf" standing for +infinity}

inline nlohmann::ordered_json grid_to_json(const GridPotential& phi) {
  nlohmann::ordered_json j;
  j["dim"] = phi.grid.dim;
  j["points_per_axis"] = phi.grid.points_per_axis;
  j["spacing"] = phi.grid.spacing;
  j["center"] = std::vector<double>(phi.grid.center.data(),
                                    phi.grid.center.data() + phi.grid.dim);
  nlohmann::ordered_json vals = nlohmann::ordered_json::array();
  for (double v : phi.values) {
    if (v == kInf)
      vals.push_back("inf");
    else
      vals.push_back(v);
  }
  j["values"] = std::move(vals);
  return j;
}

inline GridPotential grid_from_json(const nlohmann::json& j, bool repair = true) {
  int dim = j.at("dim").get<int>();
  int p = j.at("points_per_axis").get<int>();
  double h = j.at("spacing").get<double>();
  Vec center = Vec::Zero(dim);
  if (j.contains("center")) {
    auto c = j.at("center").get<std::vector<double>>();
    if (int(c.size()) != dim) throw input_error("grid_from_json: center size != dim");
    for (int a = 0; a < dim; ++a) center[a] = c[a];
  }
  GridSpec g(dim, p, h, center);
  std::vector<double> v;
  v.reserve(g.node_count());
  for (const auto& e : j.at("values")) {
    if (e.is_string()) {
      if (e.get<std::string>() != "inf") throw input_error("grid_from_json: bad value token");
      v.push_back(kInf);
    } else {
      v.push_back(e.get<double>());
    }
  }
  GridPotential phi(g, std::move(v));
  return repair ? convex_repair(phi) : phi;
}

}  // namespace lcgeo
