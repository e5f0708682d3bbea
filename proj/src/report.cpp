#include "nholo/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "nholo/dconn.hpp"
#include "nholo/lagrange.hpp"

namespace nholo {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Residual accumulator for one report row.
class RowAccum {
 public:
  RowAccum(std::string name, std::string anchor)
      : name_(std::move(name)), anchor_(std::move(anchor)) {}

  void add(double value, const Point& p) {
    double a = std::fabs(value);
    sum_ += a;
    ++count_;
    if (a >= max_) {
      max_ = a;
      worst_ = p.u;
    }
  }

  ReportRow done(double tol) const {
    ReportRow r;
    r.name = name_;
    r.anchor = anchor_;
    r.max = max_;
    r.mean = count_ ? sum_ / count_ : 0.0;
    r.worst = worst_;
    r.points = count_;
    r.pass = max_ <= tol;
    return r;
  }

  /// Emission-only row: reported, never gated.
  ReportRow info() const {
    ReportRow r = done(0.0);
    r.pass = true;
    return r;
  }

 private:
  std::string name_, anchor_;
  double max_ = 0.0, sum_ = 0.0;
  int count_ = 0;
  std::vector<double> worst_;
};

DVector random_dvector(SplitMix64& rng, int n, int m) {
  DVector x;
  x.hcomp.resize(n);
  x.vcomp.resize(m);
  for (auto& v : x.hcomp) v = rng.uniform(-2, 2);
  for (auto& v : x.vcomp) v = rng.uniform(-2, 2);
  return x;
}

void dump_field(Report* rep, const std::string& label, const ScalarField& f) {
  rep->fields.emplace_back(label, to_string(simplify(f)));
}

std::string point_text(const std::vector<double>& u) {
  std::ostringstream out;
  for (size_t i = 0; i < u.size(); ++i) {
    if (i) out << ' ';
    out << u[i];
  }
  return out.str();
}

/// Trace of the Einstein d-tensor against the scalar curvature: the
/// contracted identity g^{ab} G_ab = (1 - dim/2) R.
double einstein_trace_residual(const DMetric& dm, const RicciResult& rr,
                               const Point& p) {
  int n = dm.chart.n(), m = dm.chart.m();
  Matrix g(n, n), h(m, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.at(i, j) = evaluate(dm.gat(i, j), p);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) h.at(a, b) = evaluate(dm.hat(a, b), p);
  Matrix gi = matrix_inverse(g, 1e10), hi = matrix_inverse(h, 1e10);
  double tr = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) tr += gi.at(i, j) * rr.einstein.at(i, j);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      tr += hi.at(a, b) * rr.einstein.at(n + a, n + b);
  return tr - rr.scalar * (1.0 - 0.5 * (n + m));
}

void geometrize_rows(const Scene& scene, Report* rep) {
  const double tol = scene.options.tol;
  Lagrangian lag(scene.chart, scene.lagrangian);
  DMetric dm = sasaki_metric(lag);
  DConnection dc = canonical_dconnection(dm);
  int n = scene.chart.n();

  RowAccum inv("almost-complex involution", "acs1");
  RowAccum antis("theta antisymmetry", "slf1");
  RowAccum pair("theta metric pairing", "slf1");
  RowAccum dg("metric compatibility", "cond1s");
  RowAccum dth("theta compatibility", "cond1s");

  SplitMix64 rng(scene.options.seed);
  std::vector<Point> pts =
      scene_sample_points(scene, scene.options.samples, rng);
  for (const Point& p : pts) {
    try {
      DVector x = random_dvector(rng, n, n);
      DVector y = random_dvector(rng, n, n);
      DVector ffx = almost_complex_apply(almost_complex_apply(x));
      for (int i = 0; i < n; ++i) {
        inv.add(ffx.hcomp[i] + x.hcomp[i], p);
        inv.add(ffx.vcomp[i] + x.vcomp[i], p);
      }
      antis.add(symplectic_form(lag, x, y, p) + symplectic_form(lag, y, x, p),
                p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          DVector ei, vj;
          ei.hcomp.assign(n, 0.0);
          ei.vcomp.assign(n, 0.0);
          vj = ei;
          ei.hcomp[i] = 1.0;
          vj.vcomp[j] = 1.0;
          pair.add(symplectic_form(lag, ei, vj, p) -
                       evaluate(lag.metric(i, j), p),
                   p);
        }
      CompatResiduals cr = compat_residuals(dc, dm, p);
      dg.add(cr.dg, p);
      dth.add(cr.dtheta, p);
    } catch (const Error& e) {
      rep->errors.push_back("point " + point_text(p.u) + ": " + e.what());
    }
  }
  rep->rows.push_back(inv.done(tol));
  rep->rows.push_back(antis.done(tol));
  rep->rows.push_back(pair.done(tol));
  rep->rows.push_back(dg.done(tol));
  rep->rows.push_back(dth.done(tol));

  dump_field(rep, "L", lag.lagrangian());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      dump_field(rep,
                 "g_" + std::to_string(i + 1) + "_" + std::to_string(j + 1),
                 lag.metric(i, j));
  for (int i = 0; i < n; ++i)
    dump_field(rep, "G_" + std::to_string(i + 1), lag.spray(i));
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      dump_field(rep,
                 "N_" + std::to_string(a + 1) + "_" + std::to_string(i + 1),
                 lag.nconnection().at(a, i));
}

void curvature_rows(const Scene& scene, Report* rep) {
  const double tol = scene.options.tol;
  DMetric dm = scene_dmetric(scene);
  DConnection dc = canonical_dconnection(dm);
  int n = dm.chart.n(), m = dm.chart.m();

  RowAccum puret("pure torsion blocks", "dtors");
  RowAccum dg("metric compatibility", "cond1s");
  RowAccum dth("theta compatibility", "cond1s");
  RowAccum trace("einstein trace identity", "dricci");
  RowAccum tmax("max torsion component", "dtors");
  RowAccum rmax("max curvature component", "dcurv");
  RowAccum ricmax("max ricci component", "dricci");
  RowAccum einmax("max einstein component", "dricci");
  RowAccum scal("scalar curvature", "dricci");

  SplitMix64 rng(scene.options.seed);
  std::vector<Point> pts =
      scene_sample_points(scene, scene.options.samples, rng);
  for (const Point& p : pts) {
    try {
      DTorsion t = d_torsion(dc, dm.ncon, p);
      for (double v : t.hhh) puret.add(v, p);
      for (double v : t.vvv) puret.add(v, p);
      for (const auto* blk : {&t.hhh, &t.hhv, &t.vhh, &t.vvh, &t.vvv})
        for (double v : *blk) tmax.add(v, p);

      DCurvature R = d_curvature(dc, dm.ncon, p);
      for (const auto* blk : {&R.b1, &R.b2, &R.b3, &R.b4, &R.b5, &R.b6})
        for (double v : *blk) rmax.add(v, p);

      RicciResult rr = ricci_scalar_einstein(dc, dm, p);
      ricmax.add(rr.max_ricci(), p);
      scal.add(rr.scalar, p);
      for (double v : rr.einstein.e) einmax.add(v, p);
      trace.add(einstein_trace_residual(dm, rr, p), p);

      CompatResiduals cr = compat_residuals(dc, dm, p);
      dg.add(cr.dg, p);
      if (n == m) dth.add(cr.dtheta, p);
    } catch (const Error& e) {
      rep->errors.push_back("point " + point_text(p.u) + ": " + e.what());
    }
  }
  rep->rows.push_back(puret.done(tol));
  rep->rows.push_back(dg.done(tol));
  if (n == m) rep->rows.push_back(dth.done(tol));
  rep->rows.push_back(trace.done(std::max(tol, 1e-9)));
  rep->rows.push_back(tmax.info());
  rep->rows.push_back(rmax.info());
  rep->rows.push_back(ricmax.info());
  rep->rows.push_back(einmax.info());
  rep->rows.push_back(scal.info());
}

void solve_rows(const Scene& scene, Report* rep) {
  const double tol = scene.options.tol;
  AnsatzData a = build_solution(scene.recipe);

  RowAccum r1("base block equation", "ep1a");
  RowAccum r2("fiber equation", "ep2a");
  RowAccum r3("first connection row", "ep3a");
  RowAccum r4("second connection row", "ep4a");
  RowAccum ch4("h4 compatibility", "cond3");
  RowAccum cvp("conformal compatibility", "cond3");
  for (const Point& p : sample_points(scene.recipe.window, a)) {
    VacuumResiduals vr = vacuum_residuals(a, p);
    r1.add(vr.r1, p);
    r2.add(vr.r2, p);
    for (int i = 0; i < 3; ++i) {
      r3.add(vr.r3[i], p);
      r4.add(vr.r4[i], p);
      ch4.add(vr.c_h4[i], p);
      cvp.add(vr.c_varpi[i], p);
    }
  }
  rep->rows.push_back(r1.done(tol));
  rep->rows.push_back(r2.done(tol));
  rep->rows.push_back(r3.done(tol));
  rep->rows.push_back(r4.done(tol));
  rep->rows.push_back(ch4.done(tol));
  rep->rows.push_back(cvp.done(tol));

  // spot-check the full Ricci d-tensor on a few deterministic points
  DMetric dm = build_dmetric(a);
  DConnection dc = canonical_dconnection(dm);
  SplitMix64 rng(scene.options.seed);
  RowAccum ric("ricci d-tensor", "dricci");
  int picks = std::min(scene.options.samples, 6);
  std::vector<Point> pts = scene_sample_points(scene, picks, rng);
  for (const Point& p : pts) {
    try {
      ric.add(ricci_scalar_einstein(dc, dm, p).max_ricci(), p);
    } catch (const Error& e) {
      rep->errors.push_back("point " + point_text(p.u) + ": " + e.what());
    }
  }
  rep->rows.push_back(ric.done(tol));

  dump_field(rep, "varpi", a.varpi);
  dump_field(rep, "g2", a.g2);
  dump_field(rep, "g3", a.g3);
  dump_field(rep, "h4", a.h4);
  dump_field(rep, "h5", a.h5);
  for (int i = 0; i < 3; ++i) {
    dump_field(rep, "w_" + std::to_string(i + 1), a.w[i]);
    dump_field(rep, "n_" + std::to_string(i + 1), a.n[i]);
    dump_field(rep, "zeta_" + std::to_string(i + 1), a.zeta[i]);
  }
}

}  // namespace

bool Report::pass() const {
  if (!errors.empty()) return false;
  return std::all_of(rows.begin(), rows.end(),
                     [](const ReportRow& r) { return r.pass; });
}

int Report::exit_code() const { return pass() ? 0 : 1; }

Report cmd_geometrize(const Scene& scene) {
  if (scene.driver != Scene::Driver::Lagrangian)
    throw SceneError("geometrize needs a [lagrangian] scene");
  Report rep;
  rep.command = "geometrize";
  geometrize_rows(scene, &rep);
  return rep;
}

Report cmd_curvature(const Scene& scene) {
  if (scene.driver == Scene::Driver::Recipe)
    throw SceneError("curvature needs a [lagrangian] or [metric] scene");
  Report rep;
  rep.command = "curvature";
  curvature_rows(scene, &rep);
  return rep;
}

Report cmd_solve(const Scene& scene) {
  if (scene.driver != Scene::Driver::Recipe)
    throw SceneError("solve needs a [recipe] scene");
  Report rep;
  rep.command = "solve";
  try {
    solve_rows(scene, &rep);
  } catch (const SingularMatrixError& e) {
    rep.errors.push_back(e.what());
  } catch (const DomainError& e) {
    rep.errors.push_back(e.what());
  } catch (const Error& e) {
    rep.errors.push_back(e.what());  // staged aborts land here
  }
  return rep;
}

Report cmd_verify(const Scene& scene) {
  Report rep;
  if (scene.driver == Scene::Driver::Recipe) {
    rep = cmd_solve(scene);
  } else if (scene.driver == Scene::Driver::Lagrangian) {
    rep = cmd_geometrize(scene);
    Report curv = cmd_curvature(scene);
    rep.rows.insert(rep.rows.end(), curv.rows.begin(), curv.rows.end());
    rep.errors.insert(rep.errors.end(), curv.errors.begin(),
                      curv.errors.end());
  } else {
    rep = cmd_curvature(scene);
  }
  rep.command = "verify";
  rep.fields.clear();  // verify gates, it does not dump
  return rep;
}

Report run_command(const std::string& cmd, const Scene& scene) {
  if (cmd == "geometrize") return cmd_geometrize(scene);
  if (cmd == "curvature") return cmd_curvature(scene);
  if (cmd == "solve") return cmd_solve(scene);
  if (cmd == "verify") return cmd_verify(scene);
  throw SceneError("unknown command '" + cmd + "'");
}

std::string render_json(const Report& r) {
  ordered_json j;
  j["command"] = r.command;
  j["pass"] = r.pass();
  j["rows"] = ordered_json::array();
  for (const ReportRow& row : r.rows) {
    ordered_json o;
    o["name"] = row.name;
    o["anchor"] = row.anchor;
    o["max"] = row.max;
    o["mean"] = row.mean;
    o["worst_point"] = row.worst;
    o["points"] = row.points;
    o["pass"] = row.pass;
    j["rows"].push_back(std::move(o));
  }
  j["fields"] = ordered_json::array();
  for (const auto& [label, text] : r.fields)
    j["fields"].push_back({{"label", label}, {"expr", text}});
  j["errors"] = r.errors;
  return j.dump(2) + "\n";
}

std::string render_csv(const Report& r) {
  std::ostringstream out;
  out << "name,anchor,max,mean,points,pass\n";
  for (const ReportRow& row : r.rows)
    out << '"' << row.name << "\"," << row.anchor << ',' << row.max << ','
        << row.mean << ',' << row.points << ','
        << (row.pass ? "true" : "false") << '\n';
  return out.str();
}

std::string render_text(const Report& r) {
  std::ostringstream out;
  out << r.command << ": " << (r.pass() ? "PASS" : "FAIL") << '\n';
  for (const ReportRow& row : r.rows) {
    out << "  [" << (row.pass ? "ok" : "FAIL") << "] " << row.name << " ("
        << row.anchor << "): max " << row.max << ", mean " << row.mean
        << " over " << row.points << " samples";
    if (!row.worst.empty()) out << ", worst at (" << point_text(row.worst) << ')';
    out << '\n';
  }
  for (const auto& [label, text] : r.fields)
    out << "  " << label << " = " << text << '\n';
  for (const std::string& e : r.errors) out << "  error: " << e << '\n';
  return out.str();
}

}  // namespace nholo
