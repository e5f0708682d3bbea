#pragma once

#include <array>
#include <vector>

#include "nholo/dmetric.hpp"
#include "nholo/expr.hpp"
#include "nholo/nconn.hpp"

namespace nholo {

/// Chart for the 5D generator: h-coordinates x1, x2, x3 and fiber
/// coordinates v = y4, y5.
Chart solution_chart();

/// Data of the diagonal 5D ansatz: conformal factor varpi(x, v), sign of the
/// first metric entry, base entries g2, g3 of (x2, x3), fiber entries h4, h5
/// of (x, v), and the connection rows w_i (y4) and n_i (y5), plus the
/// conformal compensations zeta_i.
struct AnsatzData {
  Chart chart;
  ScalarField varpi;
  double g1sign = 1.0;
  ScalarField g2, g3;
  ScalarField h4, h5;
  std::array<ScalarField, 3> w, n, zeta;
};

/// Rectangular sampling grid with exclusion margins around the singular
/// loci: |v| below v_margin and any metric entry magnitude below
/// value_margin are skipped.
struct SampleWindow {
  std::vector<double> lo, hi;
  std::vector<int> count;
  int v_index = 3;
  double v_margin = 0.5;
  double value_margin = 0.1;
};

/// Raw grid over the window (v-margin applied, no field-value exclusions).
std::vector<Point> grid_points(const SampleWindow& w, const Chart& chart);

/// Grid with the field-value exclusions of `a` applied as well.
std::vector<Point> sample_points(const SampleWindow& w, const AnsatzData& a);

/// Residuals of the reduced vacuum system at a point: the base block
/// equation r1, the fiber equation r2, the y4-row equations r3_i, the y5-row
/// equations r4_i, and the compatibility conditions c_h4_i / c_varpi_i from
/// the anholonomic derivative d_i - (w_i + zeta_i) d_v + n_i d_5.
struct VacuumResiduals {
  double r1 = 0.0;
  double r2 = 0.0;
  std::array<double, 3> r3{}, r4{};
  std::array<double, 3> c_h4{}, c_varpi{};

  double max_abs() const;
};

VacuumResiduals vacuum_residuals(const AnsatzData& a, const Point& p);

/// alpha_i = d_i h5* - h5* d_i ln sqrt|h4 h5|, beta = the r2 expression,
/// gamma = 3 h5*/(2 h5) - h4*/h4.
struct AbcCoefficients {
  std::array<double, 3> alpha{};
  double beta = 0.0;
  double gamma = 0.0;
};

AbcCoefficients abc_coefficients(const ScalarField& h4, const ScalarField& h5,
                                 const Point& p);

/// Base-block solution families.
enum class GFamily {
  Exponential,  // g2 = g3 = g0 exp(a2 x2 + a3 x3)
  ProfileOde,   // g2(x2) prescribed, g3 = g30 (c0 + (1/2) int sqrt|g2| dx2)^2
  Separable,    // g2 = g2(x2), g3 = g3(x3), each term vanishes
};

struct GBlock {
  ScalarField g2, g3;
};

struct GSeed {
  GFamily family = GFamily::Exponential;
  double g0 = 1.0, a2 = 1.0, a3 = 1.0;  // Exponential
  ScalarField g2_profile;               // ProfileOde: function of x2
  double g30 = 1.0, c0 = 1.0, x2_base = 0.0;
  ScalarField g2_sep, g3_sep;  // Separable: g2(x2), g3(x3)
};

GBlock solve_g_block(const GSeed& seed, const Chart& chart);

/// sqrt|h5| = s1(x) + s2(x) int sqrt|h4| dv (or s1 + s2 v when h4 does not
/// depend on v). The integral starts at v_lo; the seeds absorb the base
/// point.
ScalarField h5_from_h4(const ScalarField& h4, const ScalarField& s1,
                       const ScalarField& s2, double v_lo);

/// h4 = h0(x)^2 ((sqrt|h5|)*)^2. Throws when h5 does not depend on v.
ScalarField h4_from_h5(const ScalarField& h5, const ScalarField& h0);

enum class WMode { Algebraic, Free };

/// Algebraic mode solves the y4-row equations pointwise: with
/// F = ln[sqrt|h4 h5|/|h5*|] one has alpha_k = -h5* d_k F and
/// beta = -h5* d_v F, so w_k = -alpha_k/beta = -d_k F / d_v F; it requires
/// beta nonzero on the window. Free mode passes the user fields through
/// after asserting alpha and beta vanish there.
std::array<ScalarField, 3> w_fields(const ScalarField& h4,
                                    const ScalarField& h5, WMode mode,
                                    const std::array<ScalarField, 3>& user,
                                    const SampleWindow& win, double tol);

/// n_k = n1_k(x) + n2_k(x) * I(v) with the integrand picked by branch:
/// h4/sqrt|h5|^3 in general, h4 when h5 does not depend on v, sqrt|h5|^-3
/// when h4 does not.
std::array<ScalarField, 3> n_fields(const ScalarField& h4,
                                    const ScalarField& h5,
                                    const std::array<ScalarField, 3>& n1,
                                    const std::array<ScalarField, 3>& n2,
                                    const SampleWindow& win);

/// zeta_i solving d_i varpi - (w_i + zeta_i) varpi* = 0; the vacuum branch
/// drops the -w_i term. Constant varpi gives zeta = 0. cond_residual is the
/// max of |varpi^(q1/q2) - h4| over the window when q1, q2 are nonzero.
struct ConformalResult {
  std::array<ScalarField, 3> zeta;
  std::array<ScalarField, 3> confeq_residual;
  double cond_residual = 0.0;
};

ConformalResult conformal_fields(const AnsatzData& a, int q1, int q2,
                                 bool vacuum, const SampleWindow& win);

/// Full generator recipe; stages run in order g -> h -> w -> n -> conformal
/// and each is verified on the window before the next one runs.
struct SolutionRecipe {
  GSeed g;
  double g1sign = 1.0;

  enum class HKind { H5FromH4, H4FromH5 };
  HKind hkind = HKind::H4FromH5;
  ScalarField h5_seed, h0;       // H4FromH5
  ScalarField h4_seed, s1, s2;   // H5FromH4

  WMode wmode = WMode::Free;
  std::array<ScalarField, 3> w;

  std::array<ScalarField, 3> n1, n2;

  ScalarField varpi;  // empty means 1
  int q1 = 0, q2 = 0;

  SampleWindow window;
  double tol = 1e-6;
};

/// Runs the recipe and returns a populated AnsatzData whose vacuum
/// residuals are below tol on the window. Throws Error naming the failing
/// stage otherwise.
AnsatzData build_solution(const SolutionRecipe& recipe);

/// The d-metric fed to the connection machinery: g-block
/// diag(g1sign varpi, varpi g2, varpi g3), v-block diag(varpi h4, varpi h5),
/// N rows w (y4) and n (y5).
DMetric build_dmetric(const AnsatzData& a);

/// 4D example on the chart (x2, x3; v, y5): base profile g(x3) solving
/// 2 g g'' - (g')^2 = 0, fiber entry h4 = a^2 g/|g v| (intermediate form) or
/// a^2 g/|g v^2| (default), a compatible 2-form theta and almost complex
/// map F. The metric entries missing from the reduced display are padded
/// with 1 to keep the blocks invertible.
struct KahlerExample {
  Chart chart;
  double a = 1.0;
  ScalarField g;       // g(x3)
  ScalarField h4;
  ScalarField varpi;
  ScalarField theta24;  // theta(e_x2, e_v)
  DMetric dm;
};

KahlerExample kahler_example(double a, const ScalarField& g,
                             double qratio = 1.0, bool final_display = true);

/// Residual of 2 g g'' - (g')^2 at p.
double kahler_ode_residual(const KahlerExample& ex, const Point& p);

/// F in adapted components: e_x2 -> A e_v, e_x3 -> A e_y5,
/// e_v -> -e_x2/A, e_y5 -> -e_x3/A with A = sqrt|g v^2|/a.
DVector kahler_F_apply(const KahlerExample& ex, const DVector& x,
                       const Point& p);

/// theta(X, Y) with the single component theta24 = -theta42.
double kahler_theta(const KahlerExample& ex, const DVector& x,
                    const DVector& y, const Point& p);

}  // namespace nholo
