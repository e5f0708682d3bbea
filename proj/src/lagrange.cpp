#include "nholo/lagrange.hpp"

#include <cmath>
#include <utility>

#include "nholo/numerics.hpp"

namespace nholo {

namespace {

// Adjugate-over-determinant inverse of a symbolic n x n matrix, n <= 3.
std::vector<ScalarField> symbolic_inverse(const std::vector<ScalarField>& m,
                                          int n) {
  auto at = [&](int i, int j) -> const ScalarField& { return m[i * n + j]; };
  ScalarField det;
  if (n == 1) {
    det = at(0, 0);
  } else if (n == 2) {
    det = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
  } else if (n == 3) {
    det = at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
          at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
          at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
  } else {
    throw Error("symbolic matrix inverse limited to n <= 3, got n = " +
                std::to_string(n));
  }
  std::vector<ScalarField> inv(n * n);
  if (n == 1) {
    inv[0] = simplify(constant(m[0].chart(), 1.0) / det);
    return inv;
  }
  if (n == 2) {
    inv[0] = simplify(at(1, 1) / det);
    inv[1] = simplify(-at(0, 1) / det);
    inv[2] = simplify(-at(1, 0) / det);
    inv[3] = simplify(at(0, 0) / det);
    return inv;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      // cofactor of (j, i) for the transpose
      int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      ScalarField cof = at(r0, c0) * at(r1, c1) - at(r0, c1) * at(r1, c0);
      inv[i * 3 + j] = simplify(cof / det);
    }
  return inv;
}

}  // namespace

Lagrangian::Lagrangian(Chart chart, ScalarField L)
    : chart_(std::move(chart)), L_(std::move(L)) {
  if (chart_.n() != chart_.m())
    throw Error("Lagrangian requires a chart with m = n");
  const int n = chart_.n();
  g_.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      ScalarField gij =
          simplify(0.5 * differentiate(differentiate(L_, n + i), n + j));
      g_[i * n + j] = gij;
      g_[j * n + i] = gij;
    }
  ginv_ = symbolic_inverse(g_, n);

  // bracket_j = d2L/dy^j dx^k y^k - dL/dx^j; G^i = (1/4) g^{ij} bracket_j
  std::vector<ScalarField> bracket(n);
  for (int j = 0; j < n; ++j) {
    ScalarField b = -differentiate(L_, j);
    for (int k = 0; k < n; ++k)
      b = b + differentiate(differentiate(L_, n + j), k) *
                  ScalarField(chart_, make_coord(n + k));
    bracket[j] = simplify(b);
  }
  spray_.resize(n);
  for (int i = 0; i < n; ++i) {
    ScalarField gi = constant(chart_, 0.0);
    for (int j = 0; j < n; ++j) gi = gi + metric_inv(i, j) * bracket[j];
    spray_[i] = simplify(0.25 * gi);
  }

  std::vector<ScalarField> ncoef(n * n);
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j)
      ncoef[a * n + j] = simplify(differentiate(spray_[a], n + j));
  ncon_ = NConnection(chart_, std::move(ncoef));
}

Lagrangian::Lagrangian(Chart chart, std::vector<ScalarField> gfields,
                       NConnection ncon)
    : chart_(std::move(chart)), g_(std::move(gfields)), ncon_(std::move(ncon)) {
  if (chart_.n() != chart_.m())
    throw Error("generalized model requires a chart with m = n");
  const int n = chart_.n();
  if (static_cast<int>(g_.size()) != n * n)
    throw Error("metric block must be n x n");
  ginv_ = symbolic_inverse(g_, n);
}

const ScalarField& Lagrangian::spray(int i) const {
  if (spray_.empty())
    throw Error("spray unavailable: model was built from (g, N) directly");
  return spray_[i];
}

Matrix hessian_metric(const Lagrangian& lag, const Point& p, Matrix* inv) {
  const int n = lag.n();
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.at(i, j) = evaluate(lag.metric(i, j), p);
  Matrix gi = matrix_inverse(g, 1e10);
  if (inv) *inv = gi;
  return g;
}

std::vector<double> semispray(const Lagrangian& lag, const Point& p) {
  std::vector<double> out(lag.n());
  for (int i = 0; i < lag.n(); ++i) out[i] = evaluate(lag.spray(i), p);
  return out;
}

NConnection canonical_nconnection(const Lagrangian& lag) {
  return lag.nconnection();
}

DMetric sasaki_metric(const Lagrangian& lag) {
  const int n = lag.n();
  std::vector<ScalarField> block(n * n);
  for (int i = 0; i < n * n; ++i) block[i] = lag.metric(i / n, i % n);
  return DMetric{lag.chart(), block, block, lag.nconnection()};
}

DVector almost_complex_apply(const DVector& x) {
  DVector out;
  out.hcomp.resize(x.vcomp.size());
  out.vcomp = x.hcomp;
  for (size_t i = 0; i < x.vcomp.size(); ++i) out.hcomp[i] = -x.vcomp[i];
  return out;
}

double symplectic_form(const Lagrangian& lag, const DVector& x,
                       const DVector& y, const Point& p) {
  const int n = lag.n();
  DVector fx = almost_complex_apply(x);
  double theta = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double gij = evaluate(lag.metric(i, j), p);
      theta += gij * (fx.hcomp[i] * y.hcomp[j] + fx.vcomp[i] * y.vcomp[j]);
    }
  return theta;
}

double euler_lagrange_check(const Lagrangian& lag,
                            const std::vector<double>& x0,
                            const std::vector<double>& y0, int steps,
                            double step) {
  const int n = lag.n();
  if (static_cast<int>(x0.size()) != n || static_cast<int>(y0.size()) != n)
    throw Error("initial data must have n components each");

  // precomputed fields for the Euler-Lagrange accelerations
  std::vector<ScalarField> dLdx(n), d2Lyx(n * n);
  for (int i = 0; i < n; ++i) {
    dLdx[i] = differentiate(lag.lagrangian(), i);
    for (int j = 0; j < n; ++j)
      d2Lyx[i * n + j] =
          differentiate(differentiate(lag.lagrangian(), n + i), j);
  }

  auto as_point = [&](const std::vector<double>& s) {
    std::vector<double> u(2 * n);
    for (int i = 0; i < n; ++i) {
      u[i] = s[i];
      u[n + i] = s[n + i];
    }
    return Point(std::move(u));
  };

  auto spray_rhs = [&](const std::vector<double>& s) {
    Point p = as_point(s);
    std::vector<double> r(2 * n);
    for (int i = 0; i < n; ++i) {
      r[i] = s[n + i];
      r[n + i] = -2.0 * evaluate(lag.spray(i), p);
    }
    return r;
  };
  auto el_rhs = [&](const std::vector<double>& s) {
    Point p = as_point(s);
    Matrix ginv;
    hessian_metric(lag, p, &ginv);
    std::vector<double> r(2 * n);
    for (int i = 0; i < n; ++i) r[i] = s[n + i];
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        double b = evaluate(dLdx[k], p);
        for (int j = 0; j < n; ++j)
          b -= evaluate(d2Lyx[k * n + j], p) * s[n + j];
        acc += ginv.at(i, k) * b;
      }
      r[n + i] = 0.5 * acc;
    }
    return r;
  };

  std::vector<double> s1(2 * n), s2(2 * n);
  for (int i = 0; i < n; ++i) {
    s1[i] = s2[i] = x0[i];
    s1[n + i] = s2[n + i] = y0[i];
  }
  double worst = 0.0;
  for (int k = 0; k < steps; ++k) {
    s1 = ode_step_rk4(s1, spray_rhs, step);
    s2 = ode_step_rk4(s2, el_rhs, step);
    for (int i = 0; i < 2 * n; ++i) {
      if (std::fabs(s1[i]) > 1e12 || std::fabs(s2[i]) > 1e12)
        throw DomainError("trajectory blow-up at step " + std::to_string(k));
      worst = std::max(worst, std::fabs(s1[i] - s2[i]));
    }
  }
  return worst;
}

double homogeneity_residual(const Lagrangian& lag, const Point& p) {
  const int n = lag.n();
  double s = -2.0 * evaluate(lag.lagrangian(), p);
  for (int k = 0; k < n; ++k)
    s += p[n + k] * evaluate(differentiate(lag.lagrangian(), n + k), p);
  return s;
}

}  // namespace nholo
