// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Usage: acceptance <nholo-binary> <scenes-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nholo/dconn.hpp"
#include "nholo/lagrange.hpp"
#include "nholo/solutions.hpp"
#include "test_util.hpp"

using namespace nholo;
using nholo::testutil::close;
using nholo::testutil::random_expr;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  const char* label;
  double limit_s;
  bool (*run)(std::string* why);
};

std::string g_bin, g_scenes;

Chart chart22() { return Chart(2, 2, {"x1", "x2", "y1", "y2"}); }

std::vector<Lagrangian> fixture_lagrangians() {
  Chart c = chart22();
  return {Lagrangian(c, parse("y1^2 + y2^2", c)),
          Lagrangian(c, parse("exp(2*x1)*(y1^2 + y2^2)", c)),
          Lagrangian(c, parse("y1*y2 + 0.1*(y1^2 + y2^2)", c))};
}

Point rp22(SplitMix64& rng) {
  return Point({rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8),
                rng.uniform(0.2, 1.2), rng.uniform(0.2, 1.2)});
}

Point rp21(SplitMix64& rng) {
  return Point({rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8),
                rng.uniform(0.2, 1.2)});
}

DMetric twisted_metric21() {
  Chart c(2, 1, {"x1", "x2", "y1"});
  return diagonal_dmetric(
      c, {parse("exp(x1) + y1^2", c), parse("1 + x2^2 + 0.3*y1^2", c)},
      {parse("exp(0.5*x1 + 0.1*y1)", c)},
      NConnection(c, {parse("0.4*x2*y1", c), parse("0.3*x1*y1", c)}));
}

DVector random_dvector(SplitMix64& rng, int n) {
  DVector x;
  x.hcomp.resize(n);
  x.vcomp.resize(n);
  for (auto& v : x.hcomp) v = rng.uniform(-2, 2);
  for (auto& v : x.vcomp) v = rng.uniform(-2, 2);
  return x;
}

bool expect(bool ok, const char* what, std::string* why) {
  if (!ok && why->empty()) *why = what;
  return ok;
}

// 1. symplectic suite on the three quadratic models
bool crit_symplectic(std::string* why) {
  SplitMix64 rng(11);
  bool ok = true;
  for (const Lagrangian& lag : fixture_lagrangians()) {
    DMetric dm = sasaki_metric(lag);
    DConnection dc = canonical_dconnection(dm);
    for (int t = 0; t < 100; ++t) {
      Point p = rp22(rng);
      DVector x = random_dvector(rng, 2), y = random_dvector(rng, 2);
      DVector ffx = almost_complex_apply(almost_complex_apply(x));
      for (int i = 0; i < 2; ++i) {
        ok &= expect(ffx.hcomp[i] == -x.hcomp[i] && ffx.vcomp[i] == -x.vcomp[i],
                     "involution not exact", why);
      }
      double th = symplectic_form(lag, x, y, p);
      ok &= expect(
          std::fabs(th + symplectic_form(lag, y, x, p)) <= 1e-9,
          "2-form not antisymmetric", why);
      // pairing with the metric applied to the rotated argument
      DVector fx = almost_complex_apply(x);
      double want = 0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          want += evaluate(lag.metric(i, j), p) *
                  (fx.hcomp[i] * y.hcomp[j] + fx.vcomp[i] * y.vcomp[j]);
      ok &= expect(std::fabs(th - want) <= 1e-9, "pairing identity", why);

      CompatResiduals cr = compat_residuals(dc, dm, p);
      ok &= expect(cr.dg <= 1e-8, "metric compatibility", why);
      ok &= expect(cr.dtheta <= 1e-8, "2-form compatibility", why);
    }
  }
  return ok;
}

// 2. metricity and vanishing pure torsion of the canonical connection
bool crit_canonical(std::string* why) {
  SplitMix64 rng(13);
  std::vector<DMetric> fixtures;
  for (const Lagrangian& lag : fixture_lagrangians())
    fixtures.push_back(sasaki_metric(lag));
  fixtures.push_back(twisted_metric21());
  bool ok = true;
  for (const DMetric& dm : fixtures) {
    DConnection dc = canonical_dconnection(dm);
    int dim = dm.chart.dim();
    for (int t = 0; t < 100; ++t) {
      Point p = dim == 4 ? rp22(rng) : rp21(rng);
      ok &= expect(compat_residuals(dc, dm, p).dg <= 1e-9, "metricity", why);
      DTorsion tt = d_torsion(dc, dm.ncon, p);
      for (double v : tt.hhh)
        ok &= expect(std::fabs(v) <= 1e-9, "pure base torsion", why);
      for (double v : tt.vvv)
        ok &= expect(std::fabs(v) <= 1e-9, "pure fiber torsion", why);
    }
  }
  return ok;
}

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

// 3. curvature component formulas against the commutator oracle
bool crit_curvature_oracle(std::string* why) {
  SplitMix64 rng(17);
  Chart c = chart22();
  DMetric fixtures[] = {
      sasaki_metric(Lagrangian(c, parse("exp(2*x1)*(y1^2 + y2^2)", c))),
      twisted_metric21()};
  bool ok = true;
  for (const DMetric& dm : fixtures) {
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
        ok &= expect(close(out[g], want, 1e-7), "formula vs oracle", why);
      }
    }
  }
  return ok;
}

// 4. canonical connection as frame-adapted Levi-Civita plus deformation
bool crit_deformation(std::string* why) {
  SplitMix64 rng(19);
  bool ok = true;
  for (const Lagrangian& lag : fixture_lagrangians()) {
    DMetric dm = sasaki_metric(lag);
    for (int t = 0; t < 10; ++t) {
      Point p = rp22(rng);
      ok &= expect(levi_civita_and_deformation(dm, p).residual <= 1e-8,
                   "deformation identity", why);
    }
  }
  return ok;
}

// 5. solution generator end to end plus perturbation sensitivity
bool crit_generator(std::string* why) {
  Chart c = solution_chart();
  SolutionRecipe r;
  r.g.family = GFamily::Exponential;
  r.g.a2 = 1.0;
  r.g.a3 = 1.0;
  r.hkind = SolutionRecipe::HKind::H4FromH5;
  r.h5_seed = parse("v^2", c);
  r.h0 = constant(c, 1.0);
  r.wmode = WMode::Free;
  r.w = {constant(c, 0.05), constant(c, 0.1), constant(c, -0.07)};
  r.n1 = {constant(c, 0.3), constant(c, 0.0), constant(c, 0.1)};
  r.n2 = {constant(c, 0.2), constant(c, 0.0), constant(c, 0.0)};
  r.window.lo = {0.0, -0.4, -0.4, 1.0, -0.4};
  r.window.hi = {0.0, 0.4, 0.4, 2.0, 0.4};
  r.window.count = {1, 6, 6, 6, 6};
  r.tol = 1e-6;

  bool ok = true;
  AnsatzData a;
  try {
    a = build_solution(r);
  } catch (const Error& e) {
    *why = e.what();
    return false;
  }
  std::vector<Point> pts = sample_points(r.window, a);
  double worst = 0;
  for (const Point& p : pts)
    worst = std::max(worst, vacuum_residuals(a, p).max_abs());
  ok &= expect(worst <= 1e-6, "reduced-system residual", why);

  DMetric dm = build_dmetric(a);
  DConnection dc = canonical_dconnection(dm);
  SplitMix64 rng(23);
  for (int t = 0; t < 6; ++t) {
    Point p({0.0, rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4),
             rng.uniform(1.0, 2.0), rng.uniform(-0.4, 0.4)});
    ok &= expect(ricci_scalar_einstein(dc, dm, p).max_ricci() <= 1e-6,
                 "ricci residual", why);
  }

  AnsatzData bad = a;
  bad.h5 = parse("v^2*(1 + 0.1*v)", c);
  DMetric dmb = build_dmetric(bad);
  DConnection dcb = canonical_dconnection(dmb);
  double worst_r2 = 0, worst_ric = 0;
  for (int t = 0; t < 4; ++t) {
    Point p({0.0, 0.1 * t, -0.2, 1.2 + 0.2 * t, 0.1});
    worst_r2 = std::max(worst_r2, std::fabs(vacuum_residuals(bad, p).r2));
    worst_ric = std::max(worst_ric,
                         ricci_scalar_einstein(dcb, dmb, p).max_ricci());
  }
  ok &= expect(worst_r2 >= 1e-3, "perturbation visible in residuals", why);
  ok &= expect(worst_ric >= 1e-3, "perturbation visible in ricci", why);
  return ok;
}

// 6. the reduced four dimensional example
bool crit_example4d(std::string* why) {
  Chart c(2, 2, {"x2", "x3", "v", "y5"});
  KahlerExample ex = kahler_example(2.0, parse("x3^2", c));
  SplitMix64 rng(29);
  bool ok = true;
  for (int t = 0; t < 50; ++t) {
    Point p({rng.uniform(-1, 1), rng.uniform(0.6, 1.5), rng.uniform(0.8, 1.8),
             rng.uniform(-1, 1)});
    ok &= expect(std::fabs(kahler_ode_residual(ex, p)) <= 1e-12,
                 "profile equation", why);
    DVector x = random_dvector(rng, 2), y = random_dvector(rng, 2);
    DVector ffx = kahler_F_apply(ex, kahler_F_apply(ex, x, p), p);
    for (int i = 0; i < 2; ++i)
      ok &= expect(std::fabs(ffx.hcomp[i] + x.hcomp[i]) <= 1e-10 &&
                       std::fabs(ffx.vcomp[i] + x.vcomp[i]) <= 1e-10,
                   "involution", why);
    ok &= expect(std::fabs(kahler_theta(ex, x, y, p) +
                           kahler_theta(ex, y, x, p)) <= 1e-12,
                 "antisymmetry", why);
  }
  return ok;
}

// 7. symbolic derivatives vs finite differences; jets vs symbolic
bool crit_derivatives(std::string* why) {
  SplitMix64 rng(31);
  Chart c = chart22();
  bool ok = true;
  for (int t = 0; t < 1000; ++t) {
    ScalarField f(c, random_expr(rng, c, 3));
    Point p = nholo::testutil::random_point(rng, c);
    int k = static_cast<int>(rng.next() % 4);
    double h = 1e-5;
    Point pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    double fd = (evaluate(f, pp) - evaluate(f, pm)) / (2 * h);
    double sym = evaluate(differentiate(f, k), p);
    ok &= expect(close(fd, sym, 1e-5), "symbolic vs central difference", why);

    if (t < 200) {
      Jet j = jet_eval(f, p, 2);
      ok &= expect(close(j.value(), evaluate(f, p), 1e-10), "jet value", why);
      ok &= expect(close(j.grad(k), sym, 1e-10), "jet gradient", why);
      double h2 = evaluate(differentiate(differentiate(f, k), k), p);
      ok &= expect(close(j.hess(k, k), h2, 1e-10), "jet hessian", why);
    }
  }
  return ok;
}

// 8. byte-identical machine reports across repeated runs
bool crit_determinism(std::string* why) {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const char* names[] = {"flat_lagrangian", "conformal_lagrangian",
                         "offdiag_lagrangian", "product_metric",
                         "twisted_metric", "vacuum_recipe"};
  bool ok = true;
  for (const char* name : names) {
    std::string scene = g_scenes + "/" + name + ".scene";
    std::string ref;
    // two plain runs plus one with a different advertised thread budget
    const char* prefixes[] = {"", "", "OMP_NUM_THREADS=8 "};
    for (int run = 0; run < 3; ++run) {
      std::string out = "/tmp/nholo_accept_" + std::to_string(run) + ".json";
      std::string cmdline = std::string(prefixes[run]) + g_bin + " verify " +
                            scene + " --format json --out " + out +
                            " > /dev/null 2>&1";
      int rc = std::system(cmdline.c_str());
      ok &= expect(WEXITSTATUS(rc) == 0, "verify exit code", why);
      std::string text = slurp(out);
      if (run == 0)
        ref = text;
      else
        ok &= expect(text == ref, "byte-identical reports", why);
    }
    if (!ok) {
      if (why->empty()) *why = name;
      break;
    }
  }
  return ok;
}

const Criterion kCriteria[] = {
    {"symplectic suite (involution, pairing, compatibility)", 10,
     crit_symplectic},
    {"canonical connection metricity and pure-torsion vanishing", 10,
     crit_canonical},
    {"curvature formulas vs commutator oracle", 30, crit_curvature_oracle},
    {"adapted Levi-Civita deformation identity", 30, crit_deformation},
    {"solution generator end to end with perturbation gate", 60,
     crit_generator},
    {"reduced 4d example checks", 5, crit_example4d},
    {"derivative infrastructure vs finite differences", 10, crit_derivatives},
    {"deterministic machine reports", 120, crit_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <nholo-binary> <scenes-dir>\n");
    return 2;
  }
  g_bin = argv[1];
  g_scenes = argv[2];

  int failures = 0;
  int idx = 0;
  for (const Criterion& cr : kCriteria) {
    ++idx;
    std::string why;
    auto t0 = Clock::now();
    bool ok = false;
    try {
      ok = cr.run(&why);
    } catch (const std::exception& e) {
      why = e.what();
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs > cr.limit_s) {
      ok = false;
      if (why.empty()) why = "over time budget";
    }
    std::printf("criterion %d: %s - %s (%.1fs)%s%s\n", idx,
                ok ? "PASS" : "FAIL", cr.label, secs, why.empty() ? "" : ": ",
                why.c_str());
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
