#pragma once

#include <array>
#include <vector>

#include "nholo/chart.hpp"
#include "nholo/expr.hpp"

namespace nholo {

inline constexpr int kMaxJetDim = 8;

/// Truncated multivariate jet: value plus partial derivatives through order 2
/// over a chart of dimension `dim`. The Hessian is stored as a packed upper
/// triangle, so symmetry is exact by construction.
class Jet {
 public:
  Jet() = default;
  Jet(int order, int dim, double value = 0.0);

  /// Jet of a constant: all derivative slots zero.
  static Jet constant(int order, int dim, double value);
  /// Jet of the coordinate u^idx at value v: unit gradient entry idx.
  static Jet variable(int order, int dim, int idx, double v);

  int order() const { return order_; }
  int dim() const { return dim_; }

  double value() const { return v_; }
  double& value() { return v_; }
  double grad(int i) const { return g_[i]; }
  double& grad(int i) { return g_[i]; }
  double hess(int i, int j) const { return h_[tri(i, j)]; }
  double& hess(int i, int j) { return h_[tri(i, j)]; }

  static int tri(int i, int j) {
    if (i > j) std::swap(i, j);
    return j * (j + 1) / 2 + i;
  }

 private:
  int order_ = 0;
  int dim_ = 0;
  double v_ = 0.0;
  std::array<double, kMaxJetDim> g_{};
  std::array<double, kMaxJetDim*(kMaxJetDim + 1) / 2> h_{};
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator*(double c, const Jet& a);
Jet operator+(const Jet& a, double c);
Jet operator-(const Jet& a, double c);

/// Truncated Taylor composition with a univariate function given by its
/// value and first two derivatives at a.value().
Jet compose(const Jet& a, double f0, double f1, double f2);

Jet pow(const Jet& a, double expnt);
Jet inverse(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet tanh(const Jet& a);
Jet exp(const Jet& a);
Jet ln(const Jet& a);
Jet sqrt(const Jet& a);
Jet abs(const Jet& a);

/// Evaluate a field together with its exact symbolic derivatives through
/// `order` as a jet at p.
Jet jet_eval(const ScalarField& f, const Point& p, int order);

/// Small dense matrix of jets sharing order and chart dimension.
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int cols, int order, int dim);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Jet& at(int r, int c) { return e_[r * cols_ + c]; }
  const Jet& at(int r, int c) const { return e_[r * cols_ + c]; }

  static JetMatrix identity(int n, int order, int dim);

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Jet> e_;
};

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);

/// Inverse by Gauss-Jordan elimination in jet arithmetic with partial
/// pivoting on value magnitude. Dimensions <= 5. Derivative slots follow the
/// truncated expansion of d(A^-1) = -A^-1 (dA) A^-1 automatically.
/// Throws SingularMatrixError when the value part is singular or the 1-norm
/// condition estimate exceeds `cond_limit`.
JetMatrix jet_matrix_inverse(const JetMatrix& a, double cond_limit = 1e12);

/// 1-norm condition estimate of the value part of a square jet matrix.
double condition_estimate(const JetMatrix& a);

/// Plain double matrix helpers used where no derivatives are needed.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> e;
  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), e(r * c, 0.0) {}
  double& at(int r, int c) { return e[r * cols + c]; }
  double at(int r, int c) const { return e[r * cols + c]; }
};

/// LU-based inverse with partial pivoting; throws SingularMatrixError with
/// the 1-norm condition estimate.
Matrix matrix_inverse(const Matrix& a, double cond_limit = 1e12);
double condition_estimate(const Matrix& a);

}  // namespace nholo
