#include "nholo/solutions.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace nholo {

namespace {

constexpr int kX2 = 1, kX3 = 2, kV = 3, kY5 = 4;

ScalarField sqrt_abs(const ScalarField& f) {
  return apply(Func::Sqrt, apply(Func::Abs, f));
}

bool is_zero_field(const ScalarField& f) {
  ScalarField s = simplify(f);
  return s.body()->kind == Node::Kind::Number && s.body()->number == 0.0;
}

bool depends_on(const ScalarField& f, int idx) {
  return !is_zero_field(differentiate(f, idx));
}

void require_nonzero(double v, const char* what) {
  if (std::fabs(v) < 1e-9)
    throw DomainError(std::string(what) + " vanishes at the sample point");
}

}  // namespace

Chart solution_chart() { return Chart(3, 2, {"x1", "x2", "x3", "v", "y5"}); }

std::vector<Point> grid_points(const SampleWindow& w, const Chart& chart) {
  const int dim = chart.dim();
  if (static_cast<int>(w.lo.size()) != dim ||
      static_cast<int>(w.hi.size()) != dim ||
      static_cast<int>(w.count.size()) != dim)
    throw Error("sample window shape does not match the chart");
  for (int i = 0; i < dim; ++i) {
    if (w.lo[i] > w.hi[i]) throw Error("sample window has lo > hi");
    if (w.count[i] < 1) throw Error("sample window needs counts >= 1");
  }
  std::vector<Point> out;
  std::vector<int> idx(dim, 0);
  for (;;) {
    std::vector<double> u(dim);
    for (int i = 0; i < dim; ++i)
      u[i] = w.count[i] == 1
                 ? 0.5 * (w.lo[i] + w.hi[i])
                 : w.lo[i] + (w.hi[i] - w.lo[i]) * idx[i] / (w.count[i] - 1);
    if (w.v_index < 0 || w.v_index >= dim ||
        std::fabs(u[w.v_index]) >= w.v_margin)
      out.emplace_back(std::move(u));
    int i = dim - 1;
    while (i >= 0 && ++idx[i] == w.count[i]) idx[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

std::vector<Point> sample_points(const SampleWindow& w, const AnsatzData& a) {
  std::vector<Point> out;
  for (Point& p : grid_points(w, a.chart)) {
    bool keep = true;
    for (const ScalarField* f : {&a.g2, &a.g3, &a.h4, &a.h5})
      if (std::fabs(evaluate(*f, p)) < w.value_margin) keep = false;
    if (keep) out.push_back(std::move(p));
  }
  return out;
}

double VacuumResiduals::max_abs() const {
  double worst = std::max(std::fabs(r1), std::fabs(r2));
  for (int i = 0; i < 3; ++i) {
    worst = std::max(worst, std::fabs(r3[i]));
    worst = std::max(worst, std::fabs(r4[i]));
    worst = std::max(worst, std::fabs(c_h4[i]));
    worst = std::max(worst, std::fabs(c_varpi[i]));
  }
  return worst;
}

AbcCoefficients abc_coefficients(const ScalarField& h4, const ScalarField& h5,
                                 const Point& p) {
  double h4v = evaluate(h4, p), h5v = evaluate(h5, p);
  require_nonzero(h4v, "h4");
  require_nonzero(h5v, "h5");
  ScalarField h4s = differentiate(h4, kV), h5s = differentiate(h5, kV);
  double h4sv = evaluate(h4s, p), h5sv = evaluate(h5s, p);
  double h5ssv = evaluate(differentiate(h5s, kV), p);

  AbcCoefficients out;
  out.beta = h5ssv - 0.5 * h5sv * (h4sv / h4v + h5sv / h5v);
  out.gamma = 1.5 * h5sv / h5v - h4sv / h4v;
  for (int i = 0; i < 3; ++i) {
    double dih5s = evaluate(differentiate(h5s, i), p);
    double dih4 = evaluate(differentiate(h4, i), p);
    double dih5 = evaluate(differentiate(h5, i), p);
    out.alpha[i] = dih5s - 0.5 * h5sv * (dih4 / h4v + dih5 / h5v);
  }
  return out;
}

VacuumResiduals vacuum_residuals(const AnsatzData& a, const Point& p) {
  double g2v = evaluate(a.g2, p), g3v = evaluate(a.g3, p);
  require_nonzero(g2v, "g2");
  require_nonzero(g3v, "g3");

  VacuumResiduals out;
  {
    ScalarField g2b = differentiate(a.g2, kX2), g3b = differentiate(a.g3, kX2);
    ScalarField g2p = differentiate(a.g2, kX3), g3p = differentiate(a.g3, kX3);
    double g2bv = evaluate(g2b, p), g3bv = evaluate(g3b, p);
    double g2pv = evaluate(g2p, p), g3pv = evaluate(g3p, p);
    double g3bbv = evaluate(differentiate(g3b, kX2), p);
    double g2ppv = evaluate(differentiate(g2p, kX3), p);
    out.r1 = g3bbv - g2bv * g3bv / (2 * g2v) - g3bv * g3bv / (2 * g3v) +
             g2ppv - g2pv * g3pv / (2 * g3v) - g2pv * g2pv / (2 * g2v);
  }

  AbcCoefficients abc = abc_coefficients(a.h4, a.h5, p);
  out.r2 = abc.beta;
  for (int i = 0; i < 3; ++i) {
    out.r3[i] = evaluate(a.w[i], p) * abc.beta + abc.alpha[i];
    ScalarField ns = differentiate(a.n[i], kV);
    out.r4[i] = evaluate(differentiate(ns, kV), p) +
                abc.gamma * evaluate(ns, p);
  }

  // anholonomic compatibility of h4 and varpi
  auto dhat = [&](const ScalarField& f, int i) {
    double zi = a.zeta[i].empty() ? 0.0 : evaluate(a.zeta[i], p);
    return evaluate(differentiate(f, i), p) -
           (evaluate(a.w[i], p) + zi) * evaluate(differentiate(f, kV), p) +
           evaluate(a.n[i], p) * evaluate(differentiate(f, kY5), p);
  };
  for (int i = 0; i < 3; ++i) {
    out.c_h4[i] = dhat(a.h4, i);
    out.c_varpi[i] = a.varpi.empty() ? 0.0 : dhat(a.varpi, i);
  }
  return out;
}

GBlock solve_g_block(const GSeed& seed, const Chart& chart) {
  switch (seed.family) {
    case GFamily::Exponential: {
      ScalarField arg = seed.a2 * coordinate(chart, "x2") +
                        seed.a3 * coordinate(chart, "x3");
      ScalarField g = simplify(seed.g0 * apply(Func::Exp, arg));
      return {g, g};
    }
    case GFamily::ProfileOde: {
      if (seed.g2_profile.empty())
        throw Error("profile family needs a g2(x2) seed");
      int x2 = chart.index("x2");
      ScalarField F =
          0.5 * integral_field(sqrt_abs(seed.g2_profile), x2, seed.x2_base) +
          seed.c0;
      return {seed.g2_profile, simplify(seed.g30 * F * F)};
    }
    case GFamily::Separable:
      if (seed.g2_sep.empty() || seed.g3_sep.empty())
        throw Error("separable family needs both seeds");
      return {seed.g2_sep, seed.g3_sep};
  }
  throw Error("unknown base-block family");
}

ScalarField h5_from_h4(const ScalarField& h4, const ScalarField& s1,
                       const ScalarField& s2, double v_lo) {
  const Chart& c = h4.chart();
  ScalarField I = depends_on(h4, kV)
                      ? integral_field(sqrt_abs(h4), kV, v_lo)
                      : coordinate(c, "v");
  ScalarField root = s1 + s2 * I;
  return simplify(root * root);
}

ScalarField h4_from_h5(const ScalarField& h5, const ScalarField& h0) {
  if (!depends_on(h5, kV))
    throw DomainError("h4 from h5 needs h5 to depend on v");
  ScalarField r = h0 * differentiate(sqrt_abs(h5), kV);
  return simplify(r * r);
}

std::array<ScalarField, 3> w_fields(const ScalarField& h4,
                                    const ScalarField& h5, WMode mode,
                                    const std::array<ScalarField, 3>& user,
                                    const SampleWindow& win, double tol) {
  const Chart& c = h4.chart();
  std::vector<Point> pts;
  for (Point& p : grid_points(win, c)) {
    if (std::fabs(evaluate(h4, p)) < win.value_margin) continue;
    if (std::fabs(evaluate(h5, p)) < win.value_margin) continue;
    pts.push_back(std::move(p));
  }
  if (pts.empty()) throw Error("sample window excludes every grid point");

  if (mode == WMode::Algebraic) {
    double worst_beta = 0;
    for (const Point& p : pts)
      worst_beta =
          std::max(worst_beta, std::fabs(abc_coefficients(h4, h5, p).beta));
    if (worst_beta < 1e-10)
      throw Error(
          "algebraic w-branch is degenerate: the fiber residual vanishes on "
          "the window");
    ScalarField L = apply(
        Func::Ln, sqrt_abs(h4 * h5) / apply(Func::Abs, differentiate(h5, kV)));
    std::array<ScalarField, 3> out;
    ScalarField dv = differentiate(L, kV);
    for (int k = 0; k < 3; ++k)
      out[k] = simplify(-(differentiate(L, k) / dv));
    return out;
  }

  for (const Point& p : pts) {
    AbcCoefficients abc = abc_coefficients(h4, h5, p);
    double worst = std::fabs(abc.beta);
    for (double al : abc.alpha) worst = std::max(worst, std::fabs(al));
    if (worst > tol)
      throw Error("free w-branch needs vanishing alpha and beta; residual " +
                  std::to_string(worst));
  }
  return user;
}

std::array<ScalarField, 3> n_fields(const ScalarField& h4,
                                    const ScalarField& h5,
                                    const std::array<ScalarField, 3>& n1,
                                    const std::array<ScalarField, 3>& n2,
                                    const SampleWindow& win) {
  double v_lo = win.lo.at(win.v_index);
  ScalarField integrand;
  if (!depends_on(h5, kV))
    integrand = h4;
  else if (!depends_on(h4, kV))
    integrand = pow(sqrt_abs(h5), -3.0);
  else
    integrand = h4 * pow(sqrt_abs(h5), -3.0);
  ScalarField I = integral_field(simplify(integrand), kV, v_lo);
  std::array<ScalarField, 3> out;
  for (int k = 0; k < 3; ++k) out[k] = simplify(n1[k] + n2[k] * I);
  return out;
}

ConformalResult conformal_fields(const AnsatzData& a, int q1, int q2,
                                 bool vacuum, const SampleWindow& win) {
  const Chart& c = a.chart;
  ConformalResult out;
  ScalarField varpi = a.varpi.empty() ? constant(c, 1.0) : a.varpi;

  bool constant_varpi = true;
  for (int i = 0; i < c.dim(); ++i)
    if (depends_on(varpi, i)) constant_varpi = false;

  if (constant_varpi) {
    for (int i = 0; i < 3; ++i) {
      out.zeta[i] = constant(c, 0.0);
      out.confeq_residual[i] = constant(c, 0.0);
    }
  } else {
    if (!depends_on(varpi, kV))
      throw DomainError("nonconstant varpi must depend on v");
    ScalarField vs = differentiate(varpi, kV);
    for (int i = 0; i < 3; ++i) {
      ScalarField zi = differentiate(varpi, i) / vs;
      if (!vacuum) zi = zi - a.w[i];
      out.zeta[i] = simplify(zi);
      out.confeq_residual[i] = simplify(
          differentiate(varpi, i) - (a.w[i] + out.zeta[i]) * vs);
    }
  }

  if (q1 != 0 && q2 != 0) {
    ScalarField lhs = pow(varpi, static_cast<double>(q1) / q2);
    double worst = 0;
    for (const Point& p : sample_points(win, a))
      worst = std::max(worst, std::fabs(evaluate(lhs, p) - evaluate(a.h4, p)));
    out.cond_residual = worst;
  }
  return out;
}

AnsatzData build_solution(const SolutionRecipe& recipe) {
  Chart c = solution_chart();
  AnsatzData a;
  a.chart = c;
  a.g1sign = recipe.g1sign;
  a.varpi = recipe.varpi.empty() ? constant(c, 1.0) : recipe.varpi;

  auto fail = [](const char* stage, double worst) {
    throw Error(std::string("stage ") + stage + ": residual " +
                std::to_string(worst) + " above tolerance");
  };

  // base block
  GBlock gb = solve_g_block(recipe.g, c);
  a.g2 = gb.g2;
  a.g3 = gb.g3;

  // fiber block
  if (recipe.hkind == SolutionRecipe::HKind::H4FromH5) {
    if (recipe.h5_seed.empty() || recipe.h0.empty())
      throw Error("stage h: missing h5 seed or h0");
    a.h5 = recipe.h5_seed;
    a.h4 = h4_from_h5(a.h5, recipe.h0);
  } else {
    if (recipe.h4_seed.empty() || recipe.s1.empty() || recipe.s2.empty())
      throw Error("stage h: missing h4 seed or boundary fields");
    a.h4 = recipe.h4_seed;
    a.h5 = h5_from_h4(a.h4, recipe.s1, recipe.s2,
                      recipe.window.lo.at(recipe.window.v_index));
  }
  for (int i = 0; i < 3; ++i) {
    a.w[i] = recipe.w[i].empty() ? constant(c, 0.0) : recipe.w[i];
    a.zeta[i] = constant(c, 0.0);
    a.n[i] = constant(c, 0.0);
  }

  std::vector<Point> pts = sample_points(recipe.window, a);
  if (pts.empty()) throw Error("sample window excludes every grid point");

  double worst = 0;
  for (const Point& p : pts)
    worst = std::max(worst, std::fabs(vacuum_residuals(a, p).r1));
  if (worst > recipe.tol) fail("g", worst);

  worst = 0;
  for (const Point& p : pts)
    worst = std::max(worst, std::fabs(abc_coefficients(a.h4, a.h5, p).beta));
  if (worst > recipe.tol) fail("h", worst);

  // connection rows
  a.w = w_fields(a.h4, a.h5, recipe.wmode, a.w, recipe.window, recipe.tol);

  std::array<ScalarField, 3> n1 = recipe.n1, n2 = recipe.n2;
  for (int i = 0; i < 3; ++i) {
    if (n1[i].empty()) n1[i] = constant(c, 0.0);
    if (n2[i].empty()) n2[i] = constant(c, 0.0);
  }
  a.n = n_fields(a.h4, a.h5, n1, n2, recipe.window);
  worst = 0;
  for (const Point& p : pts) {
    VacuumResiduals r = vacuum_residuals(a, p);
    for (double v : r.r4) worst = std::max(worst, std::fabs(v));
  }
  if (worst > recipe.tol) fail("n", worst);

  // conformal factor
  ConformalResult cf =
      conformal_fields(a, recipe.q1, recipe.q2, true, recipe.window);
  a.zeta = cf.zeta;
  if (cf.cond_residual > recipe.tol) fail("conformal", cf.cond_residual);

  worst = 0;
  for (const Point& p : pts)
    worst = std::max(worst, vacuum_residuals(a, p).max_abs());
  if (worst > recipe.tol) fail("final", worst);
  return a;
}

DMetric build_dmetric(const AnsatzData& a) {
  const Chart& c = a.chart;
  ScalarField varpi = a.varpi.empty() ? constant(c, 1.0) : a.varpi;
  std::vector<ScalarField> gdiag{simplify(a.g1sign * varpi),
                                 simplify(varpi * a.g2),
                                 simplify(varpi * a.g3)};
  std::vector<ScalarField> hdiag{simplify(varpi * a.h4),
                                 simplify(varpi * a.h5)};
  NConnection ncon(c, {a.w[0], a.w[1], a.w[2], a.n[0], a.n[1], a.n[2]});
  return diagonal_dmetric(c, std::move(gdiag), std::move(hdiag),
                          std::move(ncon));
}

KahlerExample kahler_example(double a, const ScalarField& g, double qratio,
                             bool final_display) {
  Chart c(2, 2, {"x2", "x3", "v", "y5"});
  KahlerExample ex;
  ex.chart = c;
  ex.a = a;
  ex.g = g;

  ScalarField v = coordinate(c, "v");
  ScalarField den = final_display ? apply(Func::Abs, g * v * v)
                                  : apply(Func::Abs, g * v);
  ex.h4 = simplify((a * a) * g / den);
  ex.varpi = simplify(pow(apply(Func::Abs, ex.h4), qratio));
  ex.theta24 = simplify(ex.varpi * g *
                        (a * pow(apply(Func::Abs, g * v * v), -0.5)));
  ex.dm = diagonal_dmetric(
      c, {simplify(ex.varpi * g), constant(c, 1.0)},
      {simplify(ex.varpi * ex.h4), constant(c, 1.0)}, NConnection::zero(c));
  return ex;
}

double kahler_ode_residual(const KahlerExample& ex, const Point& p) {
  int x3 = ex.chart.index("x3");
  ScalarField gp = differentiate(ex.g, x3);
  double gv = evaluate(ex.g, p), gpv = evaluate(gp, p);
  double gppv = evaluate(differentiate(gp, x3), p);
  return 2 * gv * gppv - gpv * gpv;
}

DVector kahler_F_apply(const KahlerExample& ex, const DVector& x,
                       const Point& p) {
  double gv = evaluate(ex.g, p), vv = p[ex.chart.index("v")];
  double A = std::sqrt(std::fabs(gv * vv * vv)) / ex.a;
  DVector out;
  out.hcomp.resize(2);
  out.vcomp.resize(2);
  for (int i = 0; i < 2; ++i) {
    out.vcomp[i] = A * x.hcomp[i];
    out.hcomp[i] = -x.vcomp[i] / A;
  }
  return out;
}

double kahler_theta(const KahlerExample& ex, const DVector& x,
                    const DVector& y, const Point& p) {
  double t = evaluate(ex.theta24, p);
  return t * (x.hcomp[0] * y.vcomp[0] - x.vcomp[0] * y.hcomp[0]);
}

}  // namespace nholo
