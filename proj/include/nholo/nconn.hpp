#pragma once

#include <vector>

#include "nholo/chart.hpp"
#include "nholo/expr.hpp"

namespace nholo {

/// Typed N-adapted frame index: h-range 0..n-1 or v-range 0..m-1.
/// Keeps the h/v index blocks apart at the API level.
struct FrameIndex {
  enum class Kind { H, V };
  Kind kind;
  int i;

  static FrameIndex h(int i) { return {Kind::H, i}; }
  static FrameIndex v(int a) { return {Kind::V, a}; }
  /// Flat position in the (e_1..e_n, e_{n+1}..e_{n+m}) ordering.
  int flat(int n) const { return kind == Kind::H ? i : n + i; }
};

/// Nonlinear connection: the m x n coefficient matrix N_i^a(u) as fields.
class NConnection {
 public:
  NConnection() = default;
  NConnection(Chart chart, std::vector<ScalarField> entries);

  static NConnection zero(const Chart& chart);

  const Chart& chart() const { return chart_; }
  int n() const { return chart_.n(); }
  int m() const { return chart_.m(); }

  /// N_i^a with a in 0..m-1, i in 0..n-1.
  const ScalarField& at(int a, int i) const { return N_[a * n() + i]; }

 private:
  Chart chart_;
  std::vector<ScalarField> N_;
};

/// Vector with components in the N-adapted frame (e_i, e_a), never the
/// coordinate frame.
struct DVector {
  std::vector<double> hcomp;
  std::vector<double> vcomp;
};

/// e_alpha f as a field: e_i = d/dx^i - N_i^a d/dy^a, e_a = d/dy^a.
ScalarField adapted_derivative_field(const NConnection& ncon,
                                     const ScalarField& f, FrameIndex alpha);

double adapted_derivative(const NConnection& ncon, const ScalarField& f,
                          FrameIndex alpha, const Point& p);

/// N-connection curvature components Omega^a_{ij}, antisymmetric in (i, j).
struct NCurvature {
  int n = 0, m = 0;
  std::vector<double> c;
  double& at(int a, int i, int j) { return c[(a * n + i) * n + j]; }
  double at(int a, int i, int j) const { return c[(a * n + i) * n + j]; }
};

NCurvature n_curvature(const NConnection& ncon, const Point& p);

/// Anholonomy coefficients W^gamma_{alpha beta} of [e_alpha, e_beta] over
/// flat frame indices (h block first). Antisymmetric in (alpha, beta).
struct Anholonomy {
  int dim = 0;
  std::vector<double> w;
  double& at(int g, int a, int b) { return w[(g * dim + a) * dim + b]; }
  double at(int g, int a, int b) const { return w[(g * dim + a) * dim + b]; }
};

Anholonomy anholonomy(const NConnection& ncon, const Point& p);

/// ([e_alpha, e_beta] f)(p) by nested symbolic application; the independent
/// oracle for the anholonomy coefficients.
double bracket_oracle(const NConnection& ncon, FrameIndex alpha,
                      FrameIndex beta, const ScalarField& f, const Point& p);

/// Almost product structure P = H - V: +1 on the h-subspace, -1 on the v one.
DVector almost_product(const DVector& x);

}  // namespace nholo
