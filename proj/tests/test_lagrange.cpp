#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nholo/lagrange.hpp"
#include "test_util.hpp"

using namespace nholo;
using nholo::testutil::close;
using nholo::testutil::close_abs;

namespace {

Chart chart22() { return Chart(2, 2, {"x1", "x2", "y1", "y2"}); }

Lagrangian flat_lag() {
  Chart c = chart22();
  return Lagrangian(c, parse("y1^2 + y2^2", c));
}

Lagrangian conformal_lag() {
  Chart c = chart22();
  return Lagrangian(c, parse("exp(2*x1)*(y1^2 + y2^2)", c));
}

Lagrangian offdiag_lag() {
  Chart c = chart22();
  return Lagrangian(c, parse("y1*y2 + 0.1*(y1^2 + y2^2)", c));
}

DVector random_dvector(SplitMix64& rng, int n) {
  DVector x;
  x.hcomp.resize(n);
  x.vcomp.resize(n);
  for (auto& v : x.hcomp) v = rng.uniform(-2, 2);
  for (auto& v : x.vcomp) v = rng.uniform(-2, 2);
  return x;
}

double sasaki_pair(const Lagrangian& lag, const DVector& x, const DVector& y,
                   const Point& p) {
  double s = 0;
  for (int i = 0; i < lag.n(); ++i)
    for (int j = 0; j < lag.n(); ++j)
      s += evaluate(lag.metric(i, j), p) *
           (x.hcomp[i] * y.hcomp[j] + x.vcomp[i] * y.vcomp[j]);
  return s;
}

}  // namespace

TEST_CASE("hessian metric examples") {
  Point p({0.3, -0.7, 0.4, 1.2});
  Matrix inv;
  Matrix g = hessian_metric(flat_lag(), p, &inv);
  CHECK(g.at(0, 0) == doctest::Approx(1.0));
  CHECK(g.at(0, 1) == doctest::Approx(0.0));
  CHECK(g.at(1, 1) == doctest::Approx(1.0));
  CHECK(inv.at(0, 0) == doctest::Approx(1.0));

  Matrix gc = hessian_metric(conformal_lag(), p);
  double e = std::exp(2 * 0.3);
  CHECK(gc.at(0, 0) == doctest::Approx(e));
  CHECK(gc.at(1, 1) == doctest::Approx(e));
  CHECK(gc.at(0, 1) == doctest::Approx(0.0));

  Chart c = chart22();
  Lagrangian off(c, parse("y1*y2", c));
  Matrix go = hessian_metric(off, p);
  CHECK(go.at(0, 1) == doctest::Approx(0.5));
  CHECK(go.at(0, 0) == doctest::Approx(0.0));

  // degenerate L = y1^2 only: Hessian singular in the y2 direction
  Lagrangian bad(c, parse("y1^2", c));
  CHECK_THROWS_AS(hessian_metric(bad, p), SingularMatrixError);
}

TEST_CASE("semispray examples") {
  Point p({0.4, 0.9, 0.8, -0.6});
  auto gf = semispray(flat_lag(), p);
  CHECK(close_abs(gf[0], 0.0, 1e-14));
  CHECK(close_abs(gf[1], 0.0, 1e-14));

  // G1 = (y1^2 - y2^2)/2, G2 = y1 y2
  auto gc = semispray(conformal_lag(), p);
  CHECK(gc[0] == doctest::Approx(0.5 * (0.64 - 0.36)));
  CHECK(gc[1] == doctest::Approx(0.8 * -0.6));

  auto go = semispray(offdiag_lag(), p);  // x-independent
  CHECK(close_abs(go[0], 0.0, 1e-14));
  CHECK(close_abs(go[1], 0.0, 1e-14));
}

TEST_CASE("spray matches Christoffel oracle for quadratic metrics") {
  // L = a_ij(x) y^i y^j with a = diag(exp(2x1), exp(2x1) + x2^2 + 1);
  // then g = a and G^i = (1/2) gamma^i_jk y^j y^k.
  Chart c = chart22();
  Lagrangian lag(c, parse("exp(2*x1)*y1^2 + (exp(2*x1)+x2^2+1)*y2^2", c));
  std::vector<ScalarField> a{
      parse("exp(2*x1)", c), constant(c, 0.0), constant(c, 0.0),
      parse("exp(2*x1)+x2^2+1", c)};
  SplitMix64 rng(64);
  for (int trial = 0; trial < 20; ++trial) {
    Point p = testutil::random_point(rng, c);
    Matrix am(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) am.at(i, j) = evaluate(a[2 * i + j], p);
    Matrix ainv = matrix_inverse(am);
    auto da = [&](int i, int j, int k) {
      return evaluate(differentiate(a[2 * i + j], k), p);
    };
    auto spray_vals = semispray(lag, p);
    for (int i = 0; i < 2; ++i) {
      double want = 0;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          double gamma = 0;
          for (int r = 0; r < 2; ++r)
            gamma += 0.5 * ainv.at(i, r) *
                     (da(j, r, k) + da(k, r, j) - da(j, k, r));
          want += 0.5 * gamma * p[2 + j] * p[2 + k];
        }
      CHECK(close(spray_vals[i], want, 1e-9));
    }
  }
}

TEST_CASE("canonical nconnection examples") {
  Point p({0.2, 0.5, 0.8, -0.6});
  NConnection nf = canonical_nconnection(flat_lag());
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 2; ++i)
      CHECK(close_abs(evaluate(nf.at(a, i), p), 0.0, 1e-14));

  NConnection nc = canonical_nconnection(conformal_lag());
  CHECK(evaluate(nc.at(0, 0), p) == doctest::Approx(0.8));   // y1
  CHECK(evaluate(nc.at(0, 1), p) == doctest::Approx(0.6));   // -y2
  CHECK(evaluate(nc.at(1, 0), p) == doctest::Approx(-0.6));  // y2
  CHECK(evaluate(nc.at(1, 1), p) == doctest::Approx(0.8));   // y1
}

TEST_CASE("sasaki metric block equality") {
  DMetric dm = sasaki_metric(conformal_lag());
  CHECK(dm.chart.n() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(structurally_equal(dm.gat(i, j).body(), dm.hat(i, j).body()));
  Point p({0.3, 0, 0, 0});
  CHECK(evaluate(dm.gat(0, 0), p) == doctest::Approx(std::exp(0.6)));
  CHECK(evaluate(dm.gat(0, 1), p) == doctest::Approx(0.0));
}

TEST_CASE("almost complex structure") {
  SplitMix64 rng(12);
  for (int k = 0; k < 50; ++k) {
    DVector x = random_dvector(rng, 2);
    DVector ffx = almost_complex_apply(almost_complex_apply(x));
    for (int i = 0; i < 2; ++i) {
      CHECK(ffx.hcomp[i] == -x.hcomp[i]);
      CHECK(ffx.vcomp[i] == -x.vcomp[i]);
    }
  }
  DVector e1{{1, 0}, {0, 0}};
  DVector fe1 = almost_complex_apply(e1);
  CHECK(fe1.hcomp == std::vector<double>{0, 0});
  CHECK(fe1.vcomp == std::vector<double>{1, 0});
}

TEST_CASE("symplectic form properties") {
  Lagrangian fixtures[] = {flat_lag(), conformal_lag(), offdiag_lag()};
  SplitMix64 rng(77);
  for (const auto& lag : fixtures) {
    for (int k = 0; k < 100; ++k) {
      Point p = testutil::random_point(rng, lag.chart());
      DVector x = random_dvector(rng, 2);
      DVector y = random_dvector(rng, 2);
      double txy = symplectic_form(lag, x, y, p);
      double tyx = symplectic_form(lag, y, x, p);
      CHECK(close(txy, -tyx, 1e-9));
      CHECK(close_abs(symplectic_form(lag, x, x, p), 0.0, 1e-9));
      // defining identity against an independent metric pairing
      double want = sasaki_pair(lag, almost_complex_apply(x), y, p);
      CHECK(close(txy, want, 1e-9));
    }
  }

  // flat model: theta(e1, ve1) = g(F e1, ve1) = g(ve1, ve1) = +1
  Point p({0, 0, 0, 0});
  DVector e1{{1, 0}, {0, 0}};
  DVector ve1{{0, 0}, {1, 0}};
  CHECK(symplectic_form(flat_lag(), e1, ve1, p) == doctest::Approx(1.0));
  CHECK(symplectic_form(flat_lag(), ve1, e1, p) == doctest::Approx(-1.0));
}

TEST_CASE("hermitian property g(FX, FY) = g(X, Y)") {
  Lagrangian lag = conformal_lag();
  SplitMix64 rng(31);
  for (int k = 0; k < 50; ++k) {
    Point p = testutil::random_point(rng, lag.chart());
    DVector x = random_dvector(rng, 2);
    DVector y = random_dvector(rng, 2);
    double a = sasaki_pair(lag, almost_complex_apply(x),
                           almost_complex_apply(y), p);
    double b = sasaki_pair(lag, x, y, p);
    CHECK(close(a, b, 1e-10));
  }
}

TEST_CASE("euler-lagrange vs spray trajectories") {
  CHECK(euler_lagrange_check(flat_lag(), {0.1, -0.2}, {0.5, 0.3}) <= 1e-10);
  CHECK(euler_lagrange_check(conformal_lag(), {0.0, 0.1}, {0.2, -0.1}) <=
        1e-7);
  // zero initial velocity: both sit still
  CHECK(euler_lagrange_check(conformal_lag(), {0.3, 0.4}, {0.0, 0.0}, 200) <=
        1e-12);
}

TEST_CASE("homogeneity diagnostic") {
  Point p({0.3, 0.5, 0.7, -0.4});
  CHECK(close_abs(homogeneity_residual(conformal_lag(), p), 0.0, 1e-12));
  Chart c = chart22();
  Lagrangian inhom(c, parse("y1^2 + y2^2 + y1", c));
  CHECK(std::fabs(homogeneity_residual(inhom, p)) > 0.1);
}

TEST_CASE("generalized model from direct (g, N) fields") {
  Chart c = chart22();
  std::vector<ScalarField> g{parse("1+x2^2", c), constant(c, 0.0),
                             constant(c, 0.0), parse("exp(x1)", c)};
  NConnection ncon(c, {parse("y1", c), constant(c, 0.0), constant(c, 0.0),
                       parse("y2", c)});
  Lagrangian model(c, g, ncon);
  CHECK_FALSE(model.has_lagrangian());
  CHECK_THROWS_AS(model.spray(0), Error);

  Point p({0.5, 1.0, 0.3, 0.4});
  CHECK(evaluate(model.metric_inv(0, 0), p) == doctest::Approx(0.5));
  DMetric dm = sasaki_metric(model);
  CHECK(evaluate(dm.hat(1, 1), p) == doctest::Approx(std::exp(0.5)));
  CHECK(evaluate(dm.ncon.at(0, 0), p) == doctest::Approx(0.3));
}
