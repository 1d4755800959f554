#include <catch_amalgamated.hpp>

#include <cmath>

#include "lcgeo/isotropic.hpp"
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

}  // namespace

TEST_CASE("moments of the gaussian") {
  for (int n : {1, 2, 3}) {
    auto g = LogConcaveFunction::closed_form(FormKind::gaussian, n);
    auto m = moments(g);
    CHECK(m.mass == Approx(std::pow(2.0 * M_PI, 0.5 * n)).epsilon(1e-12));
    CHECK(m.barycenter.norm() == Approx(0.0).margin(1e-12));
    CHECK((m.covariance - Mat::Identity(n, n)).cwiseAbs().maxCoeff() == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("moments of the volume-one cube") {
  for (int n : {1, 2, 3}) {
    auto c = LogConcaveFunction::closed_form(FormKind::indicator_cube, n, {0.5});
    auto m = moments(c);
    CHECK(m.mass == Approx(1.0).epsilon(1e-12));
    CHECK((m.covariance - Mat::Identity(n, n) / 12.0).cwiseAbs().maxCoeff() ==
          Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("grid moments agree with the closed form") {
  auto g = LogConcaveFunction::closed_form(FormKind::gaussian, 2);
  GridSpec gs(2, 129, 16.0 / 128.0);
  auto fg = resample_to_grid(g, gs);
  auto m = moments(fg);
  CHECK(m.mass == Approx(2.0 * M_PI).epsilon(1e-6));
  CHECK(m.barycenter.norm() == Approx(0.0).margin(1e-9));
  CHECK((m.covariance - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(m.quadrature_error < 1e-4);
}

TEST_CASE("grid moments of a shifted function report the barycenter") {
  // asymmetric two-sided exponential on a grid
  GridSpec gs(1, 1025, 60.0 / 1024.0);
  auto phi = GridPotential::sample(gs, [](const Vec& x) {
    return x[0] >= 0.0 ? x[0] : -3.0 * x[0];
  });
  auto f = LogConcaveFunction::from_grid(phi);
  auto m = moments(f);
  // mass = 1 + 1/3; mean = (1 - 1/9) / (4/3) = 2/3
  CHECK(m.mass == Approx(4.0 / 3.0).epsilon(5e-3));
  CHECK(m.barycenter[0] == Approx(2.0 / 3.0).epsilon(1e-3));
  // the grid-halving estimate covers the actual quadrature error
  CHECK(std::abs(m.mass - 4.0 / 3.0) / m.mass <= 1.2 * m.quadrature_error);
}

TEST_CASE("moments flag non-decaying grids") {
  GridSpec gs(1, 65, 0.05);  // hull [-1.6, 1.6], gaussian only decays to ~0.28
  auto phi = GridPotential::sample(gs, [](const Vec& x) { return 0.5 * x.squaredNorm(); });
  CHECK_THROWS_AS(moments(LogConcaveFunction::from_grid(phi)), input_error);
}

TEST_CASE("isotropic constants of the reference functions") {
  auto g1 = LogConcaveFunction::closed_form(FormKind::gaussian, 1);
  CHECK(isotropic_constant(g1) == Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  auto g3 = LogConcaveFunction::closed_form(FormKind::gaussian, 3);
  CHECK(isotropic_constant(g3) == Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  auto cube = LogConcaveFunction::closed_form(FormKind::indicator_cube, 2, {0.5});
  CHECK(isotropic_constant(cube) == Approx(1.0 / std::sqrt(12.0)).epsilon(1e-12));
}

TEST_CASE("isotropic constant is affine and scale invariant") {
  auto f = LogConcaveFunction::closed_form(FormKind::exp_p_norm, 2, {1.0, 4.0});
  double L = isotropic_constant(f);
  Mat T(2, 2);
  T << 2.0, 0.3, 0.0, 1.0;
  CHECK(isotropic_constant(f.apply_linear(T)) == Approx(L).epsilon(1e-10));
  CHECK(isotropic_constant(f.dilate(3.7)) == Approx(L).epsilon(1e-10));
  CHECK(isotropic_constant(f.scale(0.25)) == Approx(L).epsilon(1e-10));
}

TEST_CASE("isotropize sends the gaussian to exp(-pi |x|^2)") {
  for (int n : {1, 2}) {
    auto g = LogConcaveFunction::closed_form(FormKind::gaussian, n);
    auto [iso, rec] = isotropize(g);
    for (double r : {0.0, 0.4, 1.1}) {
      Vec x = Vec::Constant(n, r / std::sqrt(double(n)));
      CHECK(iso.evaluate(x) == Approx(std::exp(-M_PI * r * r)).epsilon(1e-10));
    }
    CHECK(rec.a == Approx(1.0));
    CHECK(rec.sup_norm_divisor == Approx(1.0));
    // independent quadrature oracle for the output identities
    auto m = moments(iso);
    CHECK(m.mass == Approx(1.0).margin(1e-8));
    double L = isotropic_constant(g);
    CHECK((m.covariance - L * L * Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("isotropize output identities for the whole closed-form zoo") {
  for (auto kind : {FormKind::gaussian, FormKind::exp_euclidean_norm, FormKind::indicator_ball,
                    FormKind::indicator_cube}) {
    for (int n : {1, 2}) {
      auto f = LogConcaveFunction::closed_form(kind, n, {1.0});
      auto [iso, rec] = isotropize(f);
      auto m = moments(iso);
      double L = isotropic_constant(f);
      CHECK(sup_norm(iso) == Approx(1.0).margin(1e-10));
      CHECK(m.mass == Approx(1.0).margin(1e-4));
      CHECK((m.covariance - L * L * Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-4);
      // idempotence up to tolerance
      auto [iso2, rec2] = isotropize(iso);
      CHECK((rec2.T - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-9);
      for (double r : {0.3, 0.9}) {
        Vec x = Vec::Constant(n, r);
        CHECK(iso2.evaluate(x) == Approx(iso.evaluate(x)).margin(1e-3));
      }
    }
  }
}

TEST_CASE("already isotropic input is a fixed point") {
  auto cube = LogConcaveFunction::closed_form(FormKind::indicator_cube, 2, {0.5});
  auto [iso, rec] = isotropize(cube);
  CHECK((rec.T - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rec.a == Approx(1.0));
  CHECK(rec.translation.norm() == Approx(0.0));
  Vec x(2);
  x << 0.49, -0.49;
  CHECK(iso.evaluate(x) == Approx(1.0));
  x << 0.51, 0.0;
  CHECK(iso.evaluate(x) == Approx(0.0));
}

TEST_CASE("non-centered inputs are translated and recorded") {
  auto seg = LogConcaveFunction::closed_form(FormKind::indicator_cube, 1, {0.5});
  auto f = seg.translate(v1(2.0));  // uniform on [1.5, 2.5]
  auto [iso, rec] = isotropize(f);
  CHECK(rec.translation[0] == Approx(2.0).epsilon(1e-9));
  auto m = moments(iso);
  CHECK(m.barycenter.norm() == Approx(0.0).margin(1e-9));
  CHECK(m.mass == Approx(1.0).margin(1e-9));
}

TEST_CASE("degenerate covariance is rejected") {
  // a grid potential supported on a needle: covariance collapses
  GridSpec gs(2, 65, 0.05);
  auto phi = GridPotential::sample(gs, [](const Vec& x) {
    return std::abs(x[1]) > 0.024 ? kInf : 8.0 * std::abs(x[0]);
  });
  auto f = LogConcaveFunction::from_grid(phi);
  CHECK_THROWS(isotropize(f));
}

TEST_CASE("almost isotropic gap") {
  auto dirs2 = make_direction_set(2, 720);
  auto cube = make_norm_ball(dirs2, kInf, 0.5);  // isotropic volume-one cube
  CHECK(almost_isotropic_gap(cube) == Approx(1.0).epsilon(1e-3));
  // diag(2, 1/2) image: whitening condition number 2
  Mat D(2, 2);
  D << 2.0, 0.0, 0.0, 0.5;
  auto f = LogConcaveFunction::closed_form(FormKind::indicator_cube, 2, {0.5})
               .apply_linear(D.inverse());
  auto body = level_set_body(f, 1.0, dirs2);
  CHECK(almost_isotropic_gap(body) == Approx(2.0).epsilon(1e-3));
  // ball body of the isotropized gaussian: reported, close to isotropic
  auto [iso, rec] = isotropize(LogConcaveFunction::closed_form(FormKind::gaussian, 2));
  auto K3 = ball_body(iso, 3.0, dirs2);
  double alpha = almost_isotropic_gap(K3);
  CHECK(alpha >= 1.0);
  CHECK(alpha < 1.2);
}

TEST_CASE("body isotropy matches indicator-function isotropy") {
  auto dirs2 = make_direction_set(2, 720);
  auto cube_body = make_norm_ball(dirs2, kInf, 0.5);
  auto cube_fn = LogConcaveFunction::closed_form(FormKind::indicator_cube, 2, {0.5});
  CHECK(is_isotropic_body(cube_body, 1e-4));
  CHECK(is_isotropic_function(cube_fn, 1e-6));

  double r = std::pow(1.0 / M_PI, 0.5);  // volume-one disk
  auto disk_body = make_norm_ball(dirs2, 2.0, r);
  auto disk_fn = LogConcaveFunction::closed_form(FormKind::indicator_ball, 2, {r});
  CHECK(is_isotropic_body(disk_body, 1e-4));
  CHECK(is_isotropic_function(disk_fn, 1e-6));

  Mat D(2, 2);
  D << 2.0, 0.0, 0.0, 0.5;
  auto stretched_fn = cube_fn.apply_linear(D.inverse());
  auto stretched_body = level_set_body(stretched_fn, 1.0, dirs2);
  CHECK_FALSE(is_isotropic_body(stretched_body, 1e-4));
  CHECK_FALSE(is_isotropic_function(stretched_fn, 1e-6));
}

TEST_CASE("isotropization record serializes") {
  auto f = LogConcaveFunction::closed_form(FormKind::exp_euclidean_norm, 2);
  auto [iso, rec] = isotropize(f);
  auto j = isotropization_to_json(rec);
  auto back = isotropization_from_json(j);
  CHECK((back.T - rec.T).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(back.a == Approx(rec.a));
  CHECK(back.sup_norm_divisor == Approx(rec.sup_norm_divisor));
}
