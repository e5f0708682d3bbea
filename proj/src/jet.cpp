#include "nholo/jet.hpp"

#include <cmath>
#include <limits>

namespace nholo {

namespace {

void check_pair(const Jet& a, const Jet& b) {
  if (a.order() != b.order() || a.dim() != b.dim())
    throw Error("jet arithmetic requires matching order and dimension");
}

}  // namespace

Jet::Jet(int order, int dim, double value)
    : order_(order), dim_(dim), v_(value) {
  if (order < 0 || order > 2) throw Error("jet order must be 0, 1 or 2");
  if (dim < 1 || dim > kMaxJetDim) throw Error("jet dimension out of range");
}

Jet Jet::constant(int order, int dim, double value) {
  return Jet(order, dim, value);
}

Jet Jet::variable(int order, int dim, int idx, double v) {
  Jet j(order, dim, v);
  if (order >= 1) j.grad(idx) = 1.0;
  return j;
}

Jet operator+(const Jet& a, const Jet& b) {
  check_pair(a, b);
  Jet r(a.order(), a.dim(), a.value() + b.value());
  if (a.order() >= 1)
    for (int i = 0; i < a.dim(); ++i) r.grad(i) = a.grad(i) + b.grad(i);
  if (a.order() >= 2)
    for (int j = 0; j < a.dim(); ++j)
      for (int i = 0; i <= j; ++i) r.hess(i, j) = a.hess(i, j) + b.hess(i, j);
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  check_pair(a, b);
  Jet r(a.order(), a.dim(), a.value() - b.value());
  if (a.order() >= 1)
    for (int i = 0; i < a.dim(); ++i) r.grad(i) = a.grad(i) - b.grad(i);
  if (a.order() >= 2)
    for (int j = 0; j < a.dim(); ++j)
      for (int i = 0; i <= j; ++i) r.hess(i, j) = a.hess(i, j) - b.hess(i, j);
  return r;
}

Jet operator-(const Jet& a) { return -1.0 * a; }

Jet operator*(const Jet& a, const Jet& b) {
  check_pair(a, b);
  Jet r(a.order(), a.dim(), a.value() * b.value());
  if (a.order() >= 1)
    for (int i = 0; i < a.dim(); ++i)
      r.grad(i) = a.grad(i) * b.value() + a.value() * b.grad(i);
  if (a.order() >= 2)
    for (int j = 0; j < a.dim(); ++j)
      for (int i = 0; i <= j; ++i)
        r.hess(i, j) = a.hess(i, j) * b.value() + a.value() * b.hess(i, j) +
                       a.grad(i) * b.grad(j) + a.grad(j) * b.grad(i);
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }

Jet operator*(double c, const Jet& a) {
  Jet r(a.order(), a.dim(), c * a.value());
  if (a.order() >= 1)
    for (int i = 0; i < a.dim(); ++i) r.grad(i) = c * a.grad(i);
  if (a.order() >= 2)
    for (int j = 0; j < a.dim(); ++j)
      for (int i = 0; i <= j; ++i) r.hess(i, j) = c * a.hess(i, j);
  return r;
}

Jet operator+(const Jet& a, double c) {
  Jet r = a;
  r.value() += c;
  return r;
}

Jet operator-(const Jet& a, double c) { return a + (-c); }

Jet compose(const Jet& a, double f0, double f1, double f2) {
  Jet r(a.order(), a.dim(), f0);
  if (a.order() >= 1)
    for (int i = 0; i < a.dim(); ++i) r.grad(i) = f1 * a.grad(i);
  if (a.order() >= 2)
    for (int j = 0; j < a.dim(); ++j)
      for (int i = 0; i <= j; ++i)
        r.hess(i, j) = f1 * a.hess(i, j) + f2 * a.grad(i) * a.grad(j);
  return r;
}

Jet inverse(const Jet& a) {
  double u = a.value();
  if (u == 0) throw DomainError("jet division by zero value");
  return compose(a, 1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u));
}

Jet pow(const Jet& a, double c) {
  double u = a.value();
  double f0 = std::pow(u, c);
  if (!std::isfinite(f0)) throw DomainError("jet pow: non-finite result");
  double f1 = c * std::pow(u, c - 1);
  double f2 = c * (c - 1) * std::pow(u, c - 2);
  if (a.order() >= 1 && !std::isfinite(f1))
    throw DomainError("jet pow: non-finite derivative");
  if (a.order() >= 2 && !std::isfinite(f2))
    throw DomainError("jet pow: non-finite second derivative");
  return compose(a, f0, f1, f2);
}

Jet sin(const Jet& a) {
  double u = a.value();
  return compose(a, std::sin(u), std::cos(u), -std::sin(u));
}
Jet cos(const Jet& a) {
  double u = a.value();
  return compose(a, std::cos(u), -std::sin(u), -std::cos(u));
}
Jet tan(const Jet& a) {
  double u = a.value();
  double t = std::tan(u), s = 1 + t * t;
  return compose(a, t, s, 2 * t * s);
}
Jet sinh(const Jet& a) {
  double u = a.value();
  return compose(a, std::sinh(u), std::cosh(u), std::sinh(u));
}
Jet cosh(const Jet& a) {
  double u = a.value();
  return compose(a, std::cosh(u), std::sinh(u), std::cosh(u));
}
Jet tanh(const Jet& a) {
  double u = a.value();
  double t = std::tanh(u), s = 1 - t * t;
  return compose(a, t, s, -2 * t * s);
}
Jet exp(const Jet& a) {
  double e = std::exp(a.value());
  return compose(a, e, e, e);
}
Jet ln(const Jet& a) {
  double u = a.value();
  if (u <= 0) throw DomainError("jet ln of nonpositive value");
  return compose(a, std::log(u), 1.0 / u, -1.0 / (u * u));
}
Jet sqrt(const Jet& a) {
  double u = a.value();
  if (u < 0) throw DomainError("jet sqrt of negative value");
  if (u == 0) throw DomainError("jet sqrt at zero: derivative undefined");
  double s = std::sqrt(u);
  return compose(a, s, 0.5 / s, -0.25 / (s * u));
}
Jet abs(const Jet& a) {
  double u = a.value();
  if (u == 0) throw DomainError("jet abs at zero: derivative undefined");
  double s = u > 0 ? 1.0 : -1.0;
  return compose(a, std::fabs(u), s, 0.0);
}

Jet jet_eval(const ScalarField& f, const Point& p, int order) {
  int d = f.chart().dim();
  Jet r(order, d, evaluate(f, p));
  if (order >= 1) {
    for (int i = 0; i < d; ++i) r.grad(i) = evaluate(differentiate(f, i), p);
  }
  if (order >= 2) {
    for (int j = 0; j < d; ++j) {
      ScalarField dj = differentiate(f, j);
      for (int i = 0; i <= j; ++i)
        r.hess(i, j) = evaluate(differentiate(dj, i), p);
    }
  }
  return r;
}

JetMatrix::JetMatrix(int rows, int cols, int order, int dim)
    : rows_(rows), cols_(cols), e_(rows * cols, Jet(order, dim, 0.0)) {}

JetMatrix JetMatrix::identity(int n, int order, int dim) {
  JetMatrix m(n, n, order, dim);
  for (int i = 0; i < n; ++i) m.at(i, i).value() = 1.0;
  return m;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  if (a.cols() != b.rows()) throw Error("jet matrix product shape mismatch");
  const Jet& probe = a.at(0, 0);
  JetMatrix r(a.rows(), b.cols(), probe.order(), probe.dim());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      Jet s(probe.order(), probe.dim(), 0.0);
      for (int k = 0; k < a.cols(); ++k) s = s + a.at(i, k) * b.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

double condition_estimate(const Matrix& a) {
  auto norm1 = [](const Matrix& m) {
    double best = 0;
    for (int c = 0; c < m.cols; ++c) {
      double s = 0;
      for (int r = 0; r < m.rows; ++r) s += std::fabs(m.at(r, c));
      best = std::max(best, s);
    }
    return best;
  };
  try {
    Matrix inv = matrix_inverse(a, std::numeric_limits<double>::infinity());
    return norm1(a) * norm1(inv);
  } catch (const SingularMatrixError&) {
    return std::numeric_limits<double>::infinity();
  }
}

Matrix matrix_inverse(const Matrix& a, double cond_limit) {
  if (a.rows != a.cols) throw Error("matrix inverse requires a square matrix");
  int n = a.rows;
  if (n > 5) throw Error("matrix inverse supports dimensions <= 5");
  Matrix w = a;
  Matrix inv(n, n);
  for (int i = 0; i < n; ++i) inv.at(i, i) = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(w.at(r, col)) > std::fabs(w.at(piv, col))) piv = r;
    if (w.at(piv, col) == 0)
      throw SingularMatrixError("singular matrix",
                                std::numeric_limits<double>::infinity());
    if (piv != col)
      for (int c = 0; c < n; ++c) {
        std::swap(w.e[piv * n + c], w.e[col * n + c]);
        std::swap(inv.e[piv * n + c], inv.e[col * n + c]);
      }
    double d = w.at(col, col);
    for (int c = 0; c < n; ++c) {
      w.at(col, c) /= d;
      inv.at(col, c) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = w.at(r, col);
      if (f == 0) continue;
      for (int c = 0; c < n; ++c) {
        w.at(r, c) -= f * w.at(col, c);
        inv.at(r, c) -= f * inv.at(col, c);
      }
    }
  }
  if (std::isfinite(cond_limit)) {
    auto norm1 = [n](const Matrix& m) {
      double best = 0;
      for (int c = 0; c < n; ++c) {
        double s = 0;
        for (int r = 0; r < n; ++r) s += std::fabs(m.at(r, c));
        best = std::max(best, s);
      }
      return best;
    };
    double cond = norm1(a) * norm1(inv);
    if (cond >= cond_limit)
      throw SingularMatrixError("ill-conditioned matrix", cond);
  }
  return inv;
}

double condition_estimate(const JetMatrix& a) {
  Matrix v(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) v.at(i, j) = a.at(i, j).value();
  return condition_estimate(v);
}

JetMatrix jet_matrix_inverse(const JetMatrix& a, double cond_limit) {
  if (a.rows() != a.cols())
    throw Error("jet matrix inverse requires a square matrix");
  int n = a.rows();
  if (n > 5) throw Error("jet matrix inverse supports dimensions <= 5");
  double cond = condition_estimate(a);
  if (!(cond < cond_limit))
    throw SingularMatrixError("singular or ill-conditioned jet matrix", cond);

  const Jet& probe = a.at(0, 0);
  JetMatrix w = a;
  JetMatrix inv = JetMatrix::identity(n, probe.order(), probe.dim());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(w.at(r, col).value()) > std::fabs(w.at(piv, col).value()))
        piv = r;
    if (w.at(piv, col).value() == 0)
      throw SingularMatrixError("singular jet matrix", cond);
    if (piv != col)
      for (int c = 0; c < n; ++c) {
        std::swap(w.at(piv, c), w.at(col, c));
        std::swap(inv.at(piv, c), inv.at(col, c));
      }
    Jet d = inverse(w.at(col, col));
    for (int c = 0; c < n; ++c) {
      w.at(col, c) = w.at(col, c) * d;
      inv.at(col, c) = inv.at(col, c) * d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet f = w.at(r, col);
      if (f.value() == 0) {
        bool zero = true;
        if (f.order() >= 1)
          for (int i = 0; i < f.dim() && zero; ++i)
            if (f.grad(i) != 0) zero = false;
        if (f.order() >= 2)
          for (int j = 0; j < f.dim() && zero; ++j)
            for (int i = 0; i <= j && zero; ++i)
              if (f.hess(i, j) != 0) zero = false;
        if (zero) continue;
      }
      for (int c = 0; c < n; ++c) {
        w.at(r, c) = w.at(r, c) - f * w.at(col, c);
        inv.at(r, c) = inv.at(r, c) - f * inv.at(col, c);
      }
    }
  }
  return inv;
}

}  // namespace nholo
