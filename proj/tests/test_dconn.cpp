#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nholo/dconn.hpp"
#include "nholo/lagrange.hpp"
#include "test_util.hpp"

using namespace nholo;
using nholo::testutil::close;
using nholo::testutil::close_abs;

namespace {

Chart chart22() { return Chart(2, 2, {"x1", "x2", "y1", "y2"}); }
Chart chart21() { return Chart(2, 1, {"x1", "x2", "y1"}); }

Lagrangian flat_lag() {
  Chart c = chart22();
  return Lagrangian(c, parse("y1^2 + y2^2", c));
}

Lagrangian conformal_lag() {
  Chart c = chart22();
  return Lagrangian(c, parse("exp(2*x1)*(y1^2 + y2^2)", c));
}

// fiber-only Lagrangian: N = 0 and the fiber derivative of g is totally
// symmetric, so the cyclic derivative condition on theta holds
Lagrangian fiber_lag() {
  Chart c = chart22();
  return Lagrangian(c, parse("y1^2 + y2^2 + 0.2*y1^2*y2^2", c));
}

// product metric on a (2, 1) chart: base depends on x, fiber on y, N = 0
DMetric product_metric21() {
  Chart c = chart21();
  return diagonal_dmetric(
      c, {parse("exp(2*x1)", c), parse("1 + x2^2", c)},
      {parse("1 + 0.5*y1^2", c)}, NConnection::zero(c));
}

// twisted metric on a (2, 1) chart with a nonzero N row
DMetric twisted_metric21() {
  Chart c = chart21();
  return diagonal_dmetric(
      c, {parse("exp(x1) + y1^2", c), parse("1 + x2^2 + 0.3*y1^2", c)},
      {parse("exp(0.5*x1 + 0.1*y1)", c)},
      NConnection(c, {parse("0.4*x2*y1", c), parse("0.3*x1*y1", c)}));
}

Point rp22(SplitMix64& rng) {
  return Point({rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8),
                rng.uniform(0.2, 1.2), rng.uniform(0.2, 1.2)});
}

Point rp21(SplitMix64& rng) {
  return Point({rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8),
                rng.uniform(0.2, 1.2)});
}

// full-index curvature from the six blocks, direction pair (mu, nu) matching
// the commutator oracle's (alpha, beta)
double rflat(const DCurvature& rc, int t, int g, int mu, int nu, int n) {
  if ((t < n) != (g < n)) return 0.0;
  const bool hh = t < n;
  if (mu < n && nu < n)
    return hh ? rc.R1(t, g, nu, mu) : rc.R2(t - n, g - n, nu, mu);
  if (mu >= n && nu < n)
    return hh ? rc.R3(t, g, nu, mu - n) : rc.R4(t - n, g - n, nu, mu - n);
  if (mu < n && nu >= n)
    return hh ? -rc.R3(t, g, mu, nu - n) : -rc.R4(t - n, g - n, mu, nu - n);
  return hh ? rc.R5(t, g, nu - n, mu - n) : rc.R6(t - n, g - n, nu - n, mu - n);
}

DeformBlocks sample_deformation(const Chart& c, double scale) {
  const int n = c.n(), m = c.m();
  DeformBlocks pb;
  pb.lh.assign(n * n * n, ScalarField());
  pb.lv.assign(m * m * n, ScalarField());
  pb.ch.assign(n * n * m, ScalarField());
  pb.cv.assign(m * m * m, ScalarField());
  auto s = [&](const char* e) {
    return simplify(scale * parse(e, c));
  };
  pb.lh[0] = s("sin(x1)*y1");
  pb.lh[n * n + 1] = s("x2 + 0.5*y1");
  pb.ch[1] = s("cos(x2)");
  pb.lv[0] = s("x1*y1");
  pb.cv[0] = s("y1^2");
  if (m > 1) pb.cv[m * m + 1] = s("x1 + y2");
  return pb;
}

}  // namespace

TEST_CASE("assemble and extract round trip") {
  Chart c(1, 1, {"x1", "y1"});
  DMetric dm = diagonal_dmetric(c, {constant(c, 1.0)}, {constant(c, 1.0)},
                                NConnection(c, {parse("x1*y1", c)}));
  Point p({0.5, 2.0});
  Matrix full = assemble_coordinate_metric(dm, p);
  double w = 1.0;  // x1*y1 at p
  CHECK(full.at(0, 0) == doctest::Approx(1 + w * w));
  CHECK(full.at(0, 1) == doctest::Approx(w));
  CHECK(full.at(1, 0) == doctest::Approx(w));
  CHECK(full.at(1, 1) == doctest::Approx(1.0));

  Matrix g, h, nv;
  extract_blocks(full, 1, 1, &g, &h, &nv);
  CHECK(g.at(0, 0) == doctest::Approx(1.0));
  CHECK(h.at(0, 0) == doctest::Approx(1.0));
  CHECK(nv.at(0, 0) == doctest::Approx(w));

  DMetric tw = twisted_metric21();
  SplitMix64 rng(3);
  for (int t = 0; t < 10; ++t) {
    Point q = rp21(rng);
    Matrix f2 = assemble_coordinate_metric(tw, q);
    Matrix g2, h2, n2;
    extract_blocks(f2, 2, 1, &g2, &h2, &n2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(close(g2.at(i, j), evaluate(tw.gat(i, j), q), 1e-10));
    CHECK(close(h2.at(0, 0), evaluate(tw.hat(0, 0), q), 1e-10));
    for (int i = 0; i < 2; ++i)
      CHECK(close(n2.at(0, i), evaluate(tw.ncon.at(0, i), q), 1e-10));
  }
}

TEST_CASE("canonical coefficients: flat model vanishes") {
  DMetric dm = sasaki_metric(flat_lag());
  DConnection dc = canonical_dconnection(dm);
  Point p({0.3, -0.2, 0.7, 0.4});
  ConnBlocks cb = dc.eval(p);
  for (const auto& blk : {cb.lh, cb.lv, cb.ch, cb.cv})
    for (const Jet& j : blk) CHECK(close_abs(j.value(), 0.0, 1e-12));
}

TEST_CASE("canonical coefficients against the adapted-derivative formula") {
  DMetric dm = sasaki_metric(conformal_lag());
  DConnection dc = canonical_dconnection(dm);
  const int n = 2, m = 2;
  SplitMix64 rng(17);
  for (int t = 0; t < 10; ++t) {
    Point p = rp22(rng);
    ConnBlocks cb = dc.eval(p);

    Matrix g(n, n), h(m, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g.at(i, j) = evaluate(dm.gat(i, j), p);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) h.at(a, b) = evaluate(dm.hat(a, b), p);
    Matrix ginv = matrix_inverse(g), hinv = matrix_inverse(h);
    auto eg = [&](int x, int i, int j) {
      FrameIndex f = x < n ? FrameIndex::h(x) : FrameIndex::v(x - n);
      return adapted_derivative(dm.ncon, dm.gat(i, j), f, p);
    };
    auto ehb = [&](int x, int a, int b) {
      FrameIndex f = x < n ? FrameIndex::h(x) : FrameIndex::v(x - n);
      return adapted_derivative(dm.ncon, dm.hat(a, b), f, p);
    };
    auto dN = [&](int b, int a, int k) {
      return evaluate(differentiate(dm.ncon.at(a, k), n + b), p);
    };

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double want = 0;
          for (int r = 0; r < n; ++r)
            want += 0.5 * ginv.at(i, r) *
                    (eg(k, j, r) + eg(j, k, r) - eg(r, j, k));
          CHECK(close(cb.Lh(i, j, k).value(), want, 1e-9));
        }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int k = 0; k < n; ++k) {
          double want = dN(b, a, k);
          for (int c = 0; c < m; ++c) {
            double t2 = ehb(k, b, c);
            for (int d = 0; d < m; ++d)
              t2 -= dN(b, d, k) * h.at(d, c) + dN(c, d, k) * h.at(d, b);
            want += 0.5 * hinv.at(a, c) * t2;
          }
          CHECK(close(cb.Lv(a, b, k).value(), want, 1e-9));
        }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int c = 0; c < m; ++c) {
          double want = 0;
          for (int k = 0; k < n; ++k)
            want += 0.5 * ginv.at(i, k) * ehb(n + c, j, k);  // d_c g_jk
          CHECK(close(cb.Ch(i, j, c).value(), want, 1e-9));
        }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c) {
          double want = 0;
          for (int d = 0; d < m; ++d)
            want += 0.5 * hinv.at(a, d) *
                    (ehb(n + c, b, d) + ehb(n + b, c, d) - ehb(n + d, b, c));
          CHECK(close(cb.Cv(a, b, c).value(), want, 1e-9));
        }
  }
}

TEST_CASE("horizontal C block vanishes for fiber-independent g") {
  Chart c = chart21();
  DMetric dm = diagonal_dmetric(
      c, {parse("exp(2*x1)", c), parse("1 + x2^2", c)},
      {parse("1 + 0.5*y1^2", c)},
      NConnection(c, {parse("0.2*x1*y1", c), constant(c, 0.0)}));
  ConnBlocks cb = canonical_dconnection(dm).eval(Point({0.4, -0.3, 0.8}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(close_abs(cb.Ch(i, j, 0).value(), 0.0, 1e-12));
}

TEST_CASE("canonical torsion structure") {
  DMetric fixtures[] = {sasaki_metric(conformal_lag()), twisted_metric21()};
  SplitMix64 rng(29);
  for (const auto& dm : fixtures) {
    const int n = dm.chart.n(), m = dm.chart.m();
    DConnection dc = canonical_dconnection(dm);
    for (int t = 0; t < 5; ++t) {
      Point p = dm.chart.dim() == 4 ? rp22(rng) : rp21(rng);
      DTorsion tor = d_torsion(dc, dm.ncon, p);
      NCurvature om = n_curvature(dm.ncon, p);
      for (double v : tor.hhh) CHECK(close_abs(v, 0.0, 1e-10));
      for (double v : tor.vvv) CHECK(close_abs(v, 0.0, 1e-10));
      for (int a = 0; a < m; ++a)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i)
            CHECK(close_abs(tor.Tvhh(a, j, i), om.at(a, j, i), 1e-12));
    }
  }
}

TEST_CASE("torsion blocks against the 2-form oracle") {
  DMetric dm = sasaki_metric(conformal_lag());
  const int n = 2;
  // deform away from the canonical connection so every block is exercised
  DConnection dc = deform(canonical_dconnection(dm), dm.chart,
                          sample_deformation(dm.chart, 1.0));
  SplitMix64 rng(41);
  for (int t = 0; t < 5; ++t) {
    Point p = rp22(rng);
    DTorsion tor = d_torsion(dc, dm.ncon, p);
    auto orc = [&](int al, int be, int ga) {
      return torsion_form_oracle(dc, dm.ncon, al, be, ga, p);
    };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          CHECK(close_abs(tor.Thhh(i, j, k), orc(i, j, k), 1e-8));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < 2; ++a)
          CHECK(close_abs(tor.Thhv(i, j, a), orc(i, j, n + a), 1e-8));
    for (int a = 0; a < 2; ++a)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          CHECK(close_abs(tor.Tvhh(a, j, i), orc(n + a, j, i), 1e-8));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          CHECK(close_abs(tor.Tvvv(a, b, c), orc(n + a, n + b, n + c), 1e-8));
    // this block is published with the opposite argument order
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int i = 0; i < n; ++i)
          CHECK(close_abs(tor.Tvvh(a, b, i), -orc(n + a, n + b, i), 1e-8));
  }
}

TEST_CASE("curvature vanishes for the flat model") {
  DMetric dm = sasaki_metric(flat_lag());
  DCurvature rc = d_curvature(canonical_dconnection(dm), dm.ncon,
                              Point({0.1, 0.2, 0.5, -0.3}));
  for (const auto& blk : {rc.b1, rc.b2, rc.b3, rc.b4, rc.b5, rc.b6})
    for (double v : blk) CHECK(close_abs(v, 0.0, 1e-12));
}

TEST_CASE("curvature blocks against the commutator oracle") {
  DMetric fixtures[] = {sasaki_metric(conformal_lag()), twisted_metric21()};
  SplitMix64 rng(53);
  for (const auto& dm : fixtures) {
    const int n = dm.chart.n(), dim = dm.chart.dim();
    DConnection dc = canonical_dconnection(dm);
    for (int t = 0; t < 12; ++t) {
      Point p = dim == 4 ? rp22(rng) : rp21(rng);
      DCurvature rc = d_curvature(dc, dm.ncon, p);
      int alpha = static_cast<int>(rng.next() % dim);
      int beta = static_cast<int>(rng.next() % dim);
      std::vector<double> z(dim);
      for (auto& v : z) v = rng.uniform(-1, 1);
      auto out = curvature_commutator_oracle(dc, dm.ncon, alpha, beta, z, p);
      for (int g = 0; g < dim; ++g) {
        double want = 0;
        for (int s = 0; s < dim; ++s)
          want += rflat(rc, g, s, alpha, beta, n) * z[s];
        CHECK(close(out[g], want, 1e-7));
      }
    }
  }
}

TEST_CASE("commutator oracle also covers deformed connections") {
  DMetric dm = sasaki_metric(conformal_lag());
  DConnection dc = deform(canonical_dconnection(dm), dm.chart,
                          sample_deformation(dm.chart, 0.5));
  SplitMix64 rng(59);
  for (int t = 0; t < 10; ++t) {
    Point p = rp22(rng);
    DCurvature rc = d_curvature(dc, dm.ncon, p);
    int alpha = static_cast<int>(rng.next() % 4);
    int beta = static_cast<int>(rng.next() % 4);
    std::vector<double> z(4);
    for (auto& v : z) v = rng.uniform(-1, 1);
    auto out = curvature_commutator_oracle(dc, dm.ncon, alpha, beta, z, p);
    for (int g = 0; g < 4; ++g) {
      double want = 0;
      for (int s = 0; s < 4; ++s) want += rflat(rc, g, s, alpha, beta, 2) * z[s];
      CHECK(close(out[g], want, 1e-7));
    }
  }
}

TEST_CASE("ricci, scalar and einstein tensor") {
  DMetric flat = sasaki_metric(flat_lag());
  RicciResult rr =
      ricci_scalar_einstein(canonical_dconnection(flat), flat,
                            Point({0.1, 0.4, 0.6, 0.2}));
  CHECK(close_abs(rr.max_ricci(), 0.0, 1e-12));
  CHECK(close_abs(rr.scalar, 0.0, 1e-12));

  // trace identity: g^{ab} G_ab = R (1 - dim/2)
  DMetric fixtures[] = {sasaki_metric(conformal_lag()), twisted_metric21()};
  SplitMix64 rng(61);
  for (const auto& dm : fixtures) {
    const int n = dm.chart.n(), m = dm.chart.m(), dim = n + m;
    DConnection dc = canonical_dconnection(dm);
    for (int t = 0; t < 5; ++t) {
      Point p = dim == 4 ? rp22(rng) : rp21(rng);
      RicciResult r = ricci_scalar_einstein(dc, dm, p);
      Matrix g(n, n), h(m, m);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.at(i, j) = evaluate(dm.gat(i, j), p);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) h.at(a, b) = evaluate(dm.hat(a, b), p);
      Matrix gi = matrix_inverse(g), hi = matrix_inverse(h);
      double trace = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          trace += gi.at(i, j) * r.einstein.at(i, j);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          trace += hi.at(a, b) * r.einstein.at(n + a, n + b);
      CHECK(close(trace, r.scalar * (1.0 - 0.5 * dim), 1e-9));
    }
  }
}

TEST_CASE("levi-civita transform plus deformation recovers the canonical "
          "coefficients") {
  DMetric prod = product_metric21();
  DMetric conf = sasaki_metric(conformal_lag());
  SplitMix64 rng(67);
  for (int t = 0; t < 5; ++t) {
    CHECK(levi_civita_and_deformation(prod, rp21(rng)).residual <= 1e-9);
    CHECK(levi_civita_and_deformation(conf, rp22(rng)).residual <= 1e-8);
  }
  // with N = 0 the deformation keeps only the mixed h block
  LCDeformation d = levi_civita_and_deformation(prod, Point({0.2, 0.1, 0.5}));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int g = 0; g < 3; ++g) CHECK(close_abs(d.P(g, a, b), 0.0, 1e-12));
}

TEST_CASE("levi-civita ricci: flat metric and product comparison") {
  Chart c = chart21();
  DMetric flat = diagonal_dmetric(c, {constant(c, 1.0), constant(c, 1.0)},
                                  {constant(c, 1.0)}, NConnection::zero(c));
  Matrix ric = levi_civita_ricci(flat, Point({0.3, 0.1, 0.4}));
  for (double v : ric.e) CHECK(close_abs(v, 0.0, 1e-12));

  // N = 0 product metric: the canonical connection is the Levi-Civita one,
  // so the Ricci blocks must agree
  DMetric prod = product_metric21();
  SplitMix64 rng(71);
  for (int t = 0; t < 5; ++t) {
    Point p = rp21(rng);
    Matrix lc = levi_civita_ricci(prod, p);
    RicciResult r =
        ricci_scalar_einstein(canonical_dconnection(prod), prod, p);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(close_abs(r.ric_hh.at(i, j), lc.at(i, j), 1e-8));
    CHECK(close_abs(r.ric_vv.at(0, 0), lc.at(2, 2), 1e-8));
  }
}

TEST_CASE("symmetrize and reconstruct round trip") {
  // flat: everything zero, trivially closed
  DMetric flat = sasaki_metric(flat_lag());
  SymmetrizeResult s0 = symmetrize_reconstruct(
      canonical_dconnection(flat), flat, Point({0.2, -0.1, 0.6, 0.3}));
  CHECK(close_abs(s0.residual, 0.0, 1e-12));
  CHECK(close_abs(s0.a2_residual, 0.0, 1e-12));

  // fiber-only model: theta is cyclically closed, short reconstruction
  DMetric fib = sasaki_metric(fiber_lag());
  DConnection dcf = canonical_dconnection(fib);
  SplitMix64 rng(73);
  for (int t = 0; t < 5; ++t) {
    Point p = rp22(rng);
    SymmetrizeResult s = symmetrize_reconstruct(dcf, fib, p);
    CHECK(s.a2_residual <= 1e-8);
    CHECK(s.residual <= 1e-8);
  }

  // conformal model: theta is not cyclically closed, general branch
  DMetric conf = sasaki_metric(conformal_lag());
  DConnection dcc = canonical_dconnection(conf);
  bool saw_open = false;
  for (int t = 0; t < 5; ++t) {
    Point p = rp22(rng);
    SymmetrizeResult s = symmetrize_reconstruct(dcc, conf, p);
    if (s.a2_residual > 1e-6) saw_open = true;
    CHECK(s.residual <= 1e-8);
  }
  CHECK(saw_open);
}

TEST_CASE("compatibility residuals") {
  DMetric fixtures[] = {sasaki_metric(conformal_lag()), twisted_metric21(),
                        sasaki_metric(fiber_lag())};
  SplitMix64 rng(79);
  for (const auto& dm : fixtures) {
    DConnection dc = canonical_dconnection(dm);
    for (int t = 0; t < 5; ++t) {
      Point p = dm.chart.dim() == 4 ? rp22(rng) : rp21(rng);
      CompatResiduals cr = compat_residuals(dc, dm, p);
      CHECK(cr.dg <= 1e-9);
      if (dm.chart.n() == dm.chart.m()) CHECK(cr.dtheta <= 1e-9);
    }
  }
  // flat: theta constant, cyclic residual zero
  DMetric flat = sasaki_metric(flat_lag());
  CompatResiduals cf = compat_residuals(canonical_dconnection(flat), flat,
                                        Point({0.5, 0.1, 0.2, 0.9}));
  CHECK(close_abs(cf.a2, 0.0, 1e-12));
}

TEST_CASE("curvature splits under deformation") {
  DMetric dm = sasaki_metric(conformal_lag());
  DConnection dc = canonical_dconnection(dm);
  Chart c = dm.chart;
  SplitMix64 rng(83);

  // zero deformation
  DeformBlocks zero;
  CHECK(curvature_deformation_check(dc, dm.ncon, zero, rp22(rng)) <= 1e-12);

  // constant deformation on the flat model
  DMetric flat = sasaki_metric(flat_lag());
  DeformBlocks cst;
  cst.lh.assign(8, ScalarField());
  cst.lh[0] = constant(c, 0.3);
  cst.cv.assign(8, ScalarField());
  cst.cv[3] = constant(c, -0.2);
  CHECK(curvature_deformation_check(canonical_dconnection(flat), flat.ncon,
                                    cst, rp22(rng)) <= 1e-10);

  // position-dependent deformation on the curved model
  DeformBlocks pb = sample_deformation(c, 0.1);
  for (int t = 0; t < 5; ++t)
    CHECK(curvature_deformation_check(dc, dm.ncon, pb, rp22(rng)) <= 1e-8);
}
