#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lcgeo/function.hpp"
#include "lcgeo/transforms.hpp"
#include "oracles.hpp"

using namespace lcgeo;
using Catch::Approx;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

GridPotential sample_1d(double halfwidth, int points, const std::function<double(double)>& f) {
  GridSpec g(1, points, 2.0 * halfwidth / (points - 1));
  return GridPotential::sample(g, [&](const Vec& x) { return f(x[0]); });
}

}  // namespace

TEST_CASE("legendre of the quadratic is the quadratic") {
  auto phi = sample_1d(8.0, 257, [](double x) { return 0.5 * x * x; });
  GridSpec dual(1, 257, phi.grid.spacing);
  auto lf = legendre(phi, dual);
  double h = phi.grid.spacing;
  for (std::size_t j = 0; j < dual.node_count(); ++j) {
    double y = dual.node(j)[0];
    CHECK(lf.values[j] == Approx(0.5 * y * y).margin(2.0 * h));
  }
  // geometric output
  CHECK(lf.values[dual.node_count() / 2] == Approx(0.0).margin(1e-14));
  for (double v : lf.values) CHECK(v >= -1e-12);
}

TEST_CASE("legendre of a convex indicator is the support function") {
  auto phi = sample_1d(2.0, 257, [](double x) { return std::abs(x) <= 1.0 ? 0.0 : kInf; });
  GridSpec dual(1, 101, 0.1);
  auto lf = legendre(phi, dual);
  for (std::size_t j = 0; j < dual.node_count(); ++j) {
    double y = dual.node(j)[0];
    CHECK(lf.values[j] == Approx(std::abs(y)).margin(phi.grid.spacing + 1e-12));
  }
}

TEST_CASE("legendre of x^4 at y = 4") {
  auto phi = sample_1d(3.0, 2049, [](double x) { return std::pow(x, 4.0); });
  GridSpec dual(1, 9, 1.0);  // nodes at integers -4..4
  auto lf = legendre(phi, dual);
  // oracle: brute-force max of 4x - x^4 on a fine lattice (analytic optimum x = 1)
  auto oracle = oracles::legendre_bruteforce(phi, dual);
  CHECK(lf.values[8] == Approx(oracle.values[8]).margin(1e-12));
  CHECK(lf.values[8] == Approx(3.0).margin(5e-3));
}

TEST_CASE("factorized legendre equals the exhaustive max in dim 2") {
  GridSpec g(2, 33, 0.25);
  auto phi = GridPotential::sample(g, [](const Vec& x) {
    return 0.5 * x.squaredNorm() + 0.3 * std::abs(x[0] - 0.5 * x[1]);
  });
  GridSpec dual(2, 29, 0.4);
  auto fast = legendre(phi, dual);
  auto brute = oracles::legendre_bruteforce(phi, dual);
  for (std::size_t j = 0; j < dual.node_count(); ++j)
    CHECK(fast.values[j] == Approx(brute.values[j]).margin(1e-11));
}

TEST_CASE("fast 1d legendre matches brute force to 1e-12 on 1e5 nodes") {
  auto phi = sample_1d(6.0, 100001, [](double x) { return 0.5 * x * x; });
  GridSpec dual(1, 513, 12.0 / 512.0);
  auto fast = legendre_1d_fast(phi, dual);
  auto brute = oracles::legendre_bruteforce(phi, dual);
  double worst = 0.0;
  for (std::size_t j = 0; j < dual.node_count(); ++j)
    worst = std::max(worst, std::abs(fast.values[j] - brute.values[j]));
  CHECK(worst < 1e-12);
}

TEST_CASE("fast 1d legendre of |x| is the indicator of [-1, 1]") {
  auto phi = sample_1d(10.0, 4001, [](double x) { return std::abs(x); });
  GridSpec dual(1, 41, 0.1);
  auto lf = legendre_1d_fast(phi, dual);
  for (std::size_t j = 0; j < dual.node_count(); ++j) {
    double y = dual.node(j)[0];
    if (std::abs(y) <= 1.0 - 1e-9)
      CHECK(lf.values[j] == Approx(0.0).margin(1e-9));
    else if (std::abs(y) > 1.0 + 1e-9)
      CHECK(lf.values[j] >= (std::abs(y) - 1.0) * 10.0 - 1e-9);  // grows with the hull radius
  }
}

TEST_CASE("legendre involution error is O(h) on the interior") {
  auto phi = sample_1d(6.0, 257, [](double x) { return 0.5 * x * x; });
  double h = phi.grid.spacing;
  GridSpec dual = suggest_dual_grid(phi, 257);
  auto lf = legendre(phi, dual);
  auto back = legendre(lf, phi.grid);
  for (std::size_t i = 0; i < phi.grid.node_count(); ++i) {
    double x = phi.grid.node(i)[0];
    if (std::abs(x) > 5.0) continue;
    CHECK(back.values[i] == Approx(phi.values[i]).margin(3.0 * h));
  }
}

TEST_CASE("legendre warns when the dual grid misses active slopes") {
  auto phi = sample_1d(6.0, 129, [](double x) { return 0.5 * x * x; });  // slopes up to 6
  LegendreInfo info;
  legendre(phi, GridSpec(1, 65, 0.05), &info);  // dual halfwidth 1.6
  CHECK(info.dual_grid_small);
  legendre(phi, suggest_dual_grid(phi, 129), &info);
  CHECK_FALSE(info.dual_grid_small);
}

TEST_CASE("order reversal of both transforms") {
  auto phi = sample_1d(4.0, 101, [](double x) { return 0.5 * x * x; });
  auto psi = sample_1d(4.0, 101, [](double x) { return 0.5 * x * x + 0.2 * std::abs(x); });
  GridSpec dual(1, 101, 0.12);
  auto lphi = legendre(phi, dual), lpsi = legendre(psi, dual);
  auto aphi = polar_transform(phi, dual), apsi = polar_transform(psi, dual);
  for (std::size_t j = 0; j < dual.node_count(); ++j) {
    CHECK(lphi.values[j] >= lpsi.values[j] - 1e-12);
    CHECK(aphi.values[j] >= apsi.values[j] - 1e-12);
  }
}

TEST_CASE("dilation covariance of the legendre transform") {
  // L of phi(. / t) equals (L phi)(t .) at dual nodes when t is a node ratio
  auto phi = sample_1d(4.0, 129, [](double x) { return 0.5 * x * x; });
  double t = 2.0;
  auto phit = sample_1d(8.0, 129, [&](double x) { return 0.5 * (x / t) * (x / t); });
  GridSpec dual(1, 65, 0.05);
  GridSpec dual_t(1, 65, 0.05 * t);
  auto a = legendre(phit, dual);
  auto b = legendre(phi, dual_t);
  for (std::size_t j = 0; j < dual.node_count(); ++j)
    CHECK(a.values[j] == Approx(b.values[j]).margin(1e-12));
}

TEST_CASE("polar transform: indicator of the cube maps to the cross-polytope") {
  GridSpec g(2, 41, 0.075);
  auto phi = GridPotential::sample(g, [](const Vec& x) {
    return x.lpNorm<Eigen::Infinity>() <= 1.0 ? 0.0 : kInf;
  });
  GridSpec dual(2, 41, 0.075);
  auto pol = polar_transform(phi, dual);
  for (std::size_t j = 0; j < dual.node_count(); ++j) {
    Vec y = dual.node(j);
    double l1 = y.lpNorm<1>();
    if (l1 <= 1.0 - 0.076 * 2)
      CHECK(pol.values[j] == 0.0);
    else if (l1 > 1.0 + 1e-9)
      CHECK(pol.values[j] == kInf);
  }
}

TEST_CASE("polar transform of |x| is |x|") {
  auto phi = sample_1d(4000.0, 200001, [](double x) { return std::abs(x); });
  // oracle on a handful of points: brute sup over a fine lattice
  for (double x : {0.5, 1.0, 2.0}) {
    double want = oracles::polar_1d_bruteforce([](double y) { return std::abs(y); }, x, 4000.0,
                                               400000);
    double got = polar_value(phi, v1(x));
    CHECK(got == Approx(want).margin(2e-3));
    CHECK(got == Approx(std::abs(x)).margin(2e-3));  // truncation error ~ 1/ymax
  }
}

TEST_CASE("polar of the quadratic clamps to zero at the origin") {
  auto phi = sample_1d(8.0, 257, [](double x) { return 0.5 * x * x; });
  CHECK(polar_value(phi, v1(0.0)) == 0.0);
}

TEST_CASE("closed-form transform algebra") {
  // (x^2/2)  ->  self under both transforms
  NormPotential g2 = NormPotential::power(2, 2, 0.5);
  auto lg = g2.legendre();
  CHECK(lg.p == Approx(2.0));
  CHECK(lg.s == Approx(2.0));
  CHECK(lg.coeff == Approx(0.5));
  auto pg = g2.polar();
  CHECK(pg.coeff == Approx(0.5));
  // c|x| -> |x|/c under polarity
  auto pe = NormPotential::power(2, 1, 3.0).polar();
  CHECK(pe.s == Approx(1.0));
  CHECK(pe.coeff == Approx(1.0 / 3.0));
  // x^4 -> 27 x^4 / 256
  auto p4 = NormPotential::power(2, 4, 1.0).polar();
  CHECK(p4.coeff == Approx(27.0 / 256.0));
  // indicators swap with the dual norm and reciprocal radius
  auto pc = NormPotential::ball_indicator(kInf, 2.0).polar();
  CHECK(pc.indicator);
  CHECK(pc.p == Approx(1.0));
  CHECK(pc.radius == Approx(0.5));
}

TEST_CASE("legendre dual of closed forms") {
  auto g1 = LogConcaveFunction::closed_form(FormKind::gaussian, 2);
  auto gd = legendre_dual(g1);
  for (double r : {0.0, 0.7, 2.1}) {
    Vec x(2);
    x << r, -0.3 * r;
    CHECK(gd.evaluate(x) == Approx(g1.evaluate(x)).margin(1e-14));
  }
  // indicator of the ball <-> exp(-|y|)
  auto ball = LogConcaveFunction::closed_form(FormKind::indicator_ball, 1, {1.0});
  auto bd = legendre_dual(ball);
  CHECK(bd.evaluate(v1(2.0)) == Approx(std::exp(-2.0)));
  auto back = legendre_dual(bd);
  CHECK(back.evaluate(v1(0.5)) == Approx(1.0));
  CHECK(back.evaluate(v1(1.5)) == Approx(0.0));
}

TEST_CASE("scaled polar of closed forms") {
  // cube -> n * cross-polytope (the (50n)^2 factor multiplies {0, inf})
  int n = 2;
  auto cube = LogConcaveFunction::closed_form(FormKind::indicator_cube, n, {1.0});
  auto ca = scaled_polar(cube, n);
  Vec x(2);
  x << 1.9, 0.0;  // ||x/n||_1 = 0.95 < 1
  CHECK(ca.evaluate(x) == Approx(1.0));
  x << 2.1, 0.0;
  CHECK(ca.evaluate(x) == Approx(0.0));
  // gaussian in dim 1: phi_A = 2500 * A(x^2/2) evaluated at x / 1
  auto g1 = LogConcaveFunction::closed_form(FormKind::gaussian, 1);
  auto ga = scaled_polar(g1, 1);
  CHECK(ga.evaluate(v1(0.0)) == Approx(1.0));
  CHECK(-std::log(ga.evaluate(v1(0.1))) == Approx(2500.0 * 0.5 * 0.01).epsilon(1e-9));
}

TEST_CASE("grid route of the scaled polar agrees with the closed form") {
  // hull wide enough that the attaining node y* = 2/x stays inside
  auto g1 = LogConcaveFunction::closed_form(FormKind::gaussian, 1);
  GridSpec g(1, 801, 48.0 / 800.0);
  auto gridf = resample_to_grid(g1, g);
  auto ga_grid = scaled_polar(gridf, 1);
  auto ga_exact = scaled_polar(g1, 1);
  // compare at output-lattice nodes so grid interpolation does not enter
  const GridSpec& og = ga_grid.grid().grid;
  for (int k : {3, 4, 6}) {
    double x = og.coord(0, og.half() + k);
    double a = ga_grid.potential(v1(x));
    double b = ga_exact.potential(v1(x));
    CHECK(a == Approx(b).epsilon(0.02));
  }
}

TEST_CASE("commutation of the two transforms on the closed-form family") {
  for (auto kind : {FormKind::gaussian, FormKind::exp_euclidean_norm, FormKind::exp_p_norm}) {
    auto f = LogConcaveFunction::closed_form(kind, 1, {1.0, 4.0});
    const auto& b = std::get<NormPotential>(f.backing());
    auto la = b.legendre().polar();
    auto al = b.polar().legendre();
    CHECK(la.p == Approx(al.p));
    CHECK(la.s == Approx(al.s));
    CHECK(la.coeff == Approx(al.coeff));
  }
}
