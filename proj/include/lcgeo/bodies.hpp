#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lcgeo/directions.hpp"
#include "lcgeo/function.hpp"
#include "lcgeo/util.hpp"

namespace lcgeo {

// Star body given by radial samples over a direction set. Bodies constructed
// from a function also carry an exact radial evaluator for off-sample
// directions; serialization keeps only the samples.
struct RadialBody {
  std::shared_ptr<const DirectionSet> dirs;
  Vec rho;
  std::function<double(const Vec&)> radial_fn;   // optional exact oracle
  std::function<double(const Vec&)> support_fn;  // optional exact support

  int dim() const { return dirs->dim; }
  void validate() const {
    for (int i = 0; i < rho.size(); ++i)
      if (!(rho[i] > 0.0) || !std::isfinite(rho[i]))
        throw input_error("RadialBody: radial samples must be finite and positive");
  }
};

struct SupportBody {
  std::shared_ptr<const DirectionSet> dirs;
  Vec h;
};

inline RadialBody make_body_from_radial(std::shared_ptr<const DirectionSet> dirs,
                                        std::function<double(const Vec&)> fn) {
  RadialBody K;
  K.dirs = std::move(dirs);
  K.rho = Vec(K.dirs->count());
  for (int i = 0; i < K.dirs->count(); ++i) K.rho[i] = fn(K.dirs->dir(i));
  K.radial_fn = std::move(fn);
  K.validate();
  return K;
}

inline RadialBody make_norm_ball(std::shared_ptr<const DirectionSet> dirs, double p, double r) {
  NormPotential np = NormPotential::ball_indicator(p, r);
  NormPotential dual = NormPotential::ball_indicator(np.dual_index(), 1.0);
  RadialBody K = make_body_from_radial(std::move(dirs),
                                       [np](const Vec& u) { return np.radius / np.norm(u); });
  K.support_fn = [np, dual](const Vec& u) { return np.radius * dual.norm(u); };
  return K;
}

inline RadialBody scale_body(const RadialBody& K, double c) {
  if (!(c > 0.0)) throw input_error("scale_body: factor must be positive");
  RadialBody out;
  out.dirs = K.dirs;
  out.rho = K.rho * c;
  if (K.radial_fn) {
    auto fn = K.radial_fn;
    out.radial_fn = [fn, c](const Vec& u) { return c * fn(u); };
  }
  if (K.support_fn) {
    auto fn = K.support_fn;
    out.support_fn = [fn, c](const Vec& u) { return c * fn(u); };
  }
  return out;
}

// rho in an arbitrary unit direction: exact oracle when present, otherwise
// interpolation between the sampled directions.
inline double radial_value(const RadialBody& K, const Vec& u) {
  if (K.radial_fn) return K.radial_fn(u);
  return interpolate_directional(*K.dirs, K.rho, u);
}

namespace detail {

// Level and Ball bodies of a metadata-wrapped closed form f = b o S are the
// linear preimages S^{-1} of lp balls, which gives exact radial and support
// oracles alongside the numerically sampled radii.
inline void attach_norm_ball_oracles(RadialBody& K, const LogConcaveFunction& f,
                                     double ball_radius) {
  if (f.grid_backed() || std::abs(f.scalar() - 1.0) > 1e-12 ||
      f.offset().lpNorm<Eigen::Infinity>() > 1e-14)
    return;
  const auto& b = std::get<NormPotential>(f.backing());
  NormPotential norm_p = NormPotential::ball_indicator(b.p, 1.0);
  NormPotential norm_q = NormPotential::ball_indicator(b.dual_index(), 1.0);
  Mat S = f.effective_matrix();
  Mat SinvT = S.inverse().transpose();
  K.radial_fn = [norm_p, S, ball_radius](const Vec& u) { return ball_radius / norm_p.norm(S * u); };
  K.support_fn = [norm_q, SinvT, ball_radius](const Vec& u) {
    return ball_radius * norm_q.norm(SinvT * u);
  };
}

// level radius of the backing potential: {phi_b <= t} is the lp ball of this radius
inline double backing_level_radius(const NormPotential& b, double t) {
  return b.indicator ? b.radius : std::pow(t / b.coeff, 1.0 / b.s);
}

// K_t of the backing alone is an lp ball; radius in log space
inline double backing_ball_radius(const NormPotential& b, double t) {
  if (b.indicator) return b.radius;
  return std::exp((std::log(t) + std::lgamma(t / b.s) - std::log(b.s) -
                   (t / b.s) * std::log(b.coeff)) /
                  t);
}

}  // namespace detail

// R_t(f) = {x : f(x) >= e^{-t} f(0)}; per direction, the exit radius of
// {phi <= t} found by bracketing plus bisection.
inline RadialBody level_set_body(const LogConcaveFunction& f, double t,
                                 std::shared_ptr<const DirectionSet> dirs) {
  if (!(t > 0.0)) throw input_error("level_set_body: t must be positive");
  EnvelopeConstants env = envelope_constants(f);
  double lnA = std::log(env.A);
  auto fn = [f, t, env, lnA](const Vec& u) {
    double r_hi = (t + lnA) / env.B + 1.0;
    auto pred = [&](double r) { return f.potential(r * u) <= t; };
    if (pred(r_hi)) throw numeric_error("level_set_body: level set does not close on this ray");
    if (!pred(0.0)) throw numeric_error("level_set_body: f not geometric at the origin");
    return bisect_last_true(pred, 0.0, r_hi, 1e-9);
  };
  RadialBody K = make_body_from_radial(std::move(dirs), fn);
  if (!f.grid_backed())
    detail::attach_norm_ball_oracles(
        K, f, detail::backing_level_radius(std::get<NormPotential>(f.backing()), t));
  return K;
}

namespace detail {

// log-stable evaluation of ( int_0^inf t r^{t-1} f(ru) dr )^{1/t}
inline double ball_radius_along(const LogConcaveFunction& f, double t, const Vec& u,
                                const EnvelopeConstants& env) {
  double lnA = std::log(env.A);
  // radius beyond which the potential is infinite (support cutoff), if any
  double r_support = kInf;
  {
    double probe = 1.0;
    const double horizon = (90.0 + lnA) / env.B + 1.0;
    while (probe < horizon && f.potential(probe * u) < kInf) probe *= 2.0;
    if (f.potential(probe * u) == kInf) {
      auto pred = [&](double r) { return f.potential(r * u) < kInf; };
      r_support = bisect_last_true(pred, probe / 2.0, probe, 1e-10);
    }
  }
  double r_cap = std::min(r_support, (t + 90.0 + lnA) / env.B + 1.0);

  auto h = [&](double r) {
    if (r <= 0.0) return -kInf;
    double phi = f.potential(r * u);
    if (phi == kInf) return -kInf;
    return (t - 1.0) * std::log(r) + (-phi);
  };
  if (t < 1.0) {
    // direct substitution s = r^t; bounded decreasing integrand
    double smax = std::pow(r_cap, t);
    auto g = [&](double s) { return s <= 0.0 ? f.evaluate(Vec::Zero(f.dim())) : f.evaluate(std::pow(s, 1.0 / t) * u); };
    double I = adaptive_simpson(g, 0.0, smax, 1e-9 * std::max(1.0, smax));
    return std::pow(I, 1.0 / t);
  }
  // concave exponent in log-radius; locate the peak by golden section
  double rho_hi = std::log(r_cap);
  double rho_lo = rho_hi - 45.0;
  double rho_star = golden_max([&](double rho) { return h(std::exp(rho)); }, rho_lo, rho_hi, 1e-10);
  double r_star = std::exp(rho_star);
  double H = h(r_star);
  if (!(H > -kInf)) throw input_error("ball_body: integrand vanishes along a ray");
  // integration window where h >= H - 45 (h is concave along the ray)
  double r_lo = 0.0;
  if (h(std::exp(rho_lo)) < H - 45.0) {
    auto pred = [&](double rho) { return h(std::exp(rho)) < H - 45.0; };
    r_lo = std::exp(bisect_last_true(pred, rho_lo, rho_star, 1e-12));
  }
  double r_hi = r_cap;
  if (h(r_cap) < H - 45.0) {
    auto pred = [&](double r) { return h(r) >= H - 45.0; };
    r_hi = r_cap;
    // walk right edge by bisection in plain radius
    double lo = r_star, hi = r_cap;
    for (int it = 0; it < 120; ++it) {
      double mid = 0.5 * (lo + hi);
      if (pred(mid))
        lo = mid;
      else
        hi = mid;
    }
    r_hi = hi;
  }
  auto g = [&](double r) {
    double v = h(r);
    return v == -kInf ? 0.0 : std::exp(v - H);
  };
  double Q = adaptive_simpson(g, r_lo, r_hi, 1e-8 * std::max(1.0, r_hi - r_lo));
  if (!(Q > 0.0)) throw numeric_error("ball_body: quadrature collapsed");
  return std::exp((std::log(t) + H + std::log(Q)) / t);
}

}  // namespace detail

// K_t(f): rho(u)^t = (1/f(0)) int_0^inf t r^{t-1} f(ru) dr.
inline RadialBody ball_body(const LogConcaveFunction& f, double t,
                            std::shared_ptr<const DirectionSet> dirs) {
  if (!(t > 0.0)) throw input_error("ball_body: t must be positive");
  EnvelopeConstants env = envelope_constants(f);
  auto fn = [f, t, env](const Vec& u) { return detail::ball_radius_along(f, t, u, env); };
  RadialBody K = make_body_from_radial(std::move(dirs), fn);
  if (!f.grid_backed())
    detail::attach_norm_ball_oracles(
        K, f, detail::backing_ball_radius(std::get<NormPotential>(f.backing()), t));
  return K;
}

// h(u) = max over sampled boundary vertices of rho(v) <v,u>; exact for the
// sampled-vertex hull.
inline SupportBody support_from_radial(const RadialBody& K) {
  const DirectionSet& ds = *K.dirs;
  SupportBody S;
  S.dirs = K.dirs;
  S.h = Vec(ds.count());
  // boundary points scaled rows, then a max of inner products
  Mat pts = ds.dirs;
  for (int i = 0; i < ds.count(); ++i) pts.row(i) *= K.rho[i];
  parallel_for(std::size_t(ds.count()), [&](std::size_t j) {
    double best = -kInf;
    Vec u = ds.dir(int(j));
    for (int i = 0; i < ds.count(); ++i) best = std::max(best, pts.row(i).dot(u));
    S.h[int(j)] = best;
  });
  return S;
}

inline double support_sampled(const RadialBody& K, const Vec& u) {
  double best = -kInf;
  for (int i = 0; i < K.dirs->count(); ++i)
    best = std::max(best, K.rho[i] * K.dirs->dirs.row(i).dot(u));
  return best;
}

// Support value: the exact oracle when the body carries one, otherwise local
// refinement around the best sample. A linear functional on the boundary of a
// convex body has connected superlevel sets, so ascent from the best sampled
// direction approaches the true maximum (polytope edge ridges can still bias
// the fallback search low by a fraction of the angular gap).
inline double support_value(const RadialBody& K, const Vec& u) {
  if (K.support_fn) return K.support_fn(u);
  int dim = K.dim();
  if (dim == 1) {
    double plus = radial_value(K, Vec::Constant(1, 1.0));
    double minus = radial_value(K, Vec::Constant(1, -1.0));
    return std::max(plus * u[0], -minus * u[0]);
  }
  int seed = 0;
  double best = -kInf;
  for (int i = 0; i < K.dirs->count(); ++i) {
    double val = K.rho[i] * K.dirs->dirs.row(i).dot(u);
    if (val > best) {
      best = val;
      seed = i;
    }
  }
  Vec v = K.dirs->dir(seed);
  auto val_at = [&](const Vec& w) {
    Vec wn = w.normalized();
    return radial_value(K, wn) * wn.dot(u);
  };
  if (dim == 2) {
    // the superlevel sets of <x, u> on the boundary are single arcs, so the
    // value is unimodal over any half circle containing the seed
    double th0 = std::atan2(v[1], v[0]);
    auto val_th = [&](double th) {
      Vec w(2);
      w << std::cos(th), std::sin(th);
      return radial_value(K, w) * w.dot(u);
    };
    double th = golden_max(val_th, th0 - 0.5 * M_PI, th0 + 0.5 * M_PI, 1e-10);
    return std::max(best, val_th(th));
  }
  // dim 3: zooming pattern search on the tangent plane; the step is held
  // while the best point sits on the stencil boundary, so the iterate can
  // travel across support plateaus to a distant vertex
  double cur = val_at(v);
  double span = 2.0 * std::sqrt(4.0 * M_PI / K.dirs->count());
  for (int round = 0; round < 30 && span > 1e-8; ++round) {
    Eigen::Vector3d v3(v[0], v[1], v[2]);
    Eigen::Vector3d a3 = v3.unitOrthogonal();
    Eigen::Vector3d b3 = v3.cross(a3);
    Vec e1(3), e2(3);
    e1 << a3[0], a3[1], a3[2];
    e2 << b3[0], b3[1], b3[2];
    const int k = 2;
    double ba = 0.0, bb = 0.0, bv = cur;
    for (int i = -k; i <= k; ++i)
      for (int j = -k; j <= k; ++j) {
        if (i == 0 && j == 0) continue;
        double vv = val_at(v + (span * i / k) * e1 + (span * j / k) * e2);
        if (vv > bv) {
          bv = vv;
          ba = span * i / k;
          bb = span * j / k;
        }
      }
    if (bv > cur) {
      cur = bv;
      v = (v + ba * e1 + bb * e2).normalized();
    }
    bool interior = std::max(std::abs(ba), std::abs(bb)) < span * (k - 0.5) / k;
    if (interior) span *= 0.38;
  }
  return std::max(best, cur);
}

// rho_{K°}(u) = 1 / h_K(u) with h from support_from_radial. Exact oracles of
// the parent body carry over to the polar (rho° = 1/h, h° = Minkowski gauge).
inline RadialBody polar_body(const RadialBody& K) {
  SupportBody S = support_from_radial(K);
  RadialBody P;
  P.dirs = K.dirs;
  P.rho = Vec(S.h.size());
  for (int i = 0; i < S.h.size(); ++i) {
    if (!(S.h[i] > 0.0)) throw input_error("polar_body: support function not positive");
    P.rho[i] = 1.0 / S.h[i];
  }
  P.validate();
  if (K.support_fn) {
    auto hf = K.support_fn;
    P.radial_fn = [hf](const Vec& u) { return 1.0 / hf(u); };
  }
  if (K.radial_fn) {
    auto rf = K.radial_fn;
    P.support_fn = [rf](const Vec& u) { return 1.0 / rf(u); };
  }
  return P;
}

// ||x||_K = inf{t > 0 : x in tK}
inline double minkowski_norm(const RadialBody& K, const Vec& x) {
  double n = x.norm();
  if (n == 0.0) return 0.0;
  return n / radial_value(K, x / n);
}

inline double unit_ball_volume(int n) {
  if (n < 1) throw input_error("unit_ball_volume: n must be >= 1");
  return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

inline double body_volume(const RadialBody& K) {
  int n = K.dim();
  double acc = 0.0;
  for (int i = 0; i < K.dirs->count(); ++i)
    acc += K.dirs->weights[i] * std::pow(K.rho[i], n);
  return unit_ball_volume(n) * acc;
}

// vrad(K) = (vol K / vol B)^{1/n}
inline double volume_radius(const RadialBody& K) {
  int n = K.dim();
  double acc = 0.0;
  for (int i = 0; i < K.dirs->count(); ++i)
    acc += K.dirs->weights[i] * std::pow(K.rho[i], n);
  return std::pow(acc, 1.0 / n);
}

// Smallest c with K ⊆ cT over the sampled hulls.
inline double inclusion_factor(const RadialBody& K, const RadialBody& T) {
  if (K.dirs != T.dirs && K.dirs->dirs.rows() != T.dirs->dirs.rows())
    throw input_error("inclusion_factor: direction sets must match");
  SupportBody hk = support_from_radial(K);
  SupportBody ht = support_from_radial(T);
  double best = 0.0;
  for (int i = 0; i < hk.h.size(); ++i) best = std::max(best, hk.h[i] / ht.h[i]);
  return best;
}

inline double geometric_distance(const RadialBody& K, const RadialBody& T) {
  return inclusion_factor(K, T) * inclusion_factor(T, K);
}

struct MeanWidths {
  double M = 0.0;
  double M_star = 0.0;
  double stderr_M = 0.0;
  double stderr_M_star = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
};

// Monte Carlo spherical averages of ||u||_K and h_K(u); the support values use
// the refined evaluation so polytope corners are not clipped.
inline MeanWidths mean_width_functionals(const RadialBody& K, int samples, std::uint64_t seed) {
  if (samples < 1000) throw input_error("mean_width_functionals: need at least 10^3 samples");
  std::mt19937_64 rng(seed);
  double sm = 0.0, sm2 = 0.0, ss = 0.0, ss2 = 0.0;
  for (int k = 0; k < samples; ++k) {
    Vec u = uniform_sphere_sample(K.dim(), rng);
    double nk = minkowski_norm(K, u);
    double hk = support_value(K, u);
    sm += nk;
    sm2 += nk * nk;
    ss += hk;
    ss2 += hk * hk;
  }
  MeanWidths out;
  out.samples = samples;
  out.seed = seed;
  out.M = sm / samples;
  out.M_star = ss / samples;
  out.stderr_M = std::sqrt(std::max(0.0, sm2 / samples - out.M * out.M) / samples);
  out.stderr_M_star = std::sqrt(std::max(0.0, ss2 / samples - out.M_star * out.M_star) / samples);
  return out;
}

// --- serialization -----------------------------------------------------------

inline nlohmann::ordered_json body_to_json(const RadialBody& K) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json dirs = nlohmann::ordered_json::array();
  for (int i = 0; i < K.dirs->count(); ++i) {
    std::vector<double> row(K.dirs->dim);
    for (int a = 0; a < K.dirs->dim; ++a) row[a] = K.dirs->dirs(i, a);
    dirs.push_back(row);
  }
  j["dirs"] = std::move(dirs);
  j["rho"] = std::vector<double>(K.rho.data(), K.rho.data() + K.rho.size());
  return j;
}

inline RadialBody body_from_json(const nlohmann::json& j) {
  auto dirs = j.at("dirs").get<std::vector<std::vector<double>>>();
  auto rho = j.at("rho").get<std::vector<double>>();
  if (dirs.empty() || dirs.size() != rho.size()) throw input_error("body_from_json: bad shapes");
  auto ds = std::make_shared<DirectionSet>();
  ds->dim = int(dirs[0].size());
  ds->dirs = Mat(int(dirs.size()), ds->dim);
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (int a = 0; a < ds->dim; ++a) ds->dirs(int(i), a) = dirs[i][a];
  ds->weights = Vec::Constant(int(dirs.size()), 1.0 / double(dirs.size()));
  RadialBody K;
  K.dirs = ds;
  K.rho = Eigen::Map<const Vec>(rho.data(), long(rho.size()));
  K.validate();
  return K;
}

inline std::string body_to_csv(const RadialBody& K) {
  SupportBody S = support_from_radial(K);
  std::string out = "u0,u1,u2,rho,h\n";
  char buf[160];
  for (int i = 0; i < K.dirs->count(); ++i) {
    double u[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < K.dirs->dim; ++a) u[a] = K.dirs->dirs(i, a);
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g\n", u[0], u[1], u[2],
                  K.rho[i], S.h[i]);
    out += buf;
  }
  return out;
}

}  // namespace lcgeo
