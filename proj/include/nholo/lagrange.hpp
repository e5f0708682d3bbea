#pragma once

#include <vector>

#include "nholo/dmetric.hpp"
#include "nholo/expr.hpp"
#include "nholo/jet.hpp"
#include "nholo/nconn.hpp"

namespace nholo {

/// Regular Lagrangian L(x, y) on a tangent-bundle chart (m = n). The
/// constructor derives the Hessian metric g_ij = (1/2) d^2L/dy^i dy^j, its
/// symbolic inverse (adjugate over determinant, n <= 3), the spray
/// coefficients G^i and the induced nonlinear connection N^i_j = dG^i/dy^j,
/// all as symbolic fields.
///
/// A generalized model supplying (g_ij, N^i_j) directly, with no L, uses the
/// second constructor; the spray is then unavailable.
class Lagrangian {
 public:
  Lagrangian(Chart chart, ScalarField L);
  Lagrangian(Chart chart, std::vector<ScalarField> gfields, NConnection ncon);

  const Chart& chart() const { return chart_; }
  int n() const { return chart_.n(); }
  bool has_lagrangian() const { return !L_.empty(); }
  const ScalarField& lagrangian() const { return L_; }

  /// g_ij and g^ij as fields, row major n x n.
  const ScalarField& metric(int i, int j) const { return g_[i * n() + j]; }
  const ScalarField& metric_inv(int i, int j) const {
    return ginv_[i * n() + j];
  }
  /// Spray coefficient G^i; 2G^i = (1/2) g^{ij}(d^2L/dy^j dx^k y^k - dL/dx^j).
  const ScalarField& spray(int i) const;
  const NConnection& nconnection() const { return ncon_; }

 private:
  Chart chart_;
  ScalarField L_;
  std::vector<ScalarField> g_, ginv_, spray_;
  NConnection ncon_;
};

/// g_ij values at p; fills *inv with g^ij when requested. Throws
/// SingularMatrixError when the condition estimate exceeds 1e10.
Matrix hessian_metric(const Lagrangian& lag, const Point& p,
                      Matrix* inv = nullptr);

/// G^i values at p.
std::vector<double> semispray(const Lagrangian& lag, const Point& p);

NConnection canonical_nconnection(const Lagrangian& lag);

/// Both blocks equal to g_ij, N the canonical one.
DMetric sasaki_metric(const Lagrangian& lag);

/// Almost complex structure in adapted components: (h, w) -> (-w, h), so
/// F(e_i) = ve_i and F(ve_i) = -e_i.
DVector almost_complex_apply(const DVector& x);

/// theta(X, Y) = g(FX, Y) for the Sasaki metric at p.
double symplectic_form(const Lagrangian& lag, const DVector& x,
                       const DVector& y, const Point& p);

/// Integrates the spray equations d2x/dt2 + 2G(x, dx/dt) = 0 and the
/// Euler-Lagrange system (accelerations solved through g^ij) side by side
/// with rk4; returns the max component deviation between the trajectories.
/// Throws on singular Hessian along the path or |state| > 1e12.
double euler_lagrange_check(const Lagrangian& lag,
                            const std::vector<double>& x0,
                            const std::vector<double>& y0, int steps = 1000,
                            double step = 1e-3);

/// Euler relation y . dL/dy - 2L; zero iff L is 2-homogeneous in y at p.
double homogeneity_residual(const Lagrangian& lag, const Point& p);

}  // namespace nholo
