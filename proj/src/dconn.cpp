#include "nholo/dconn.hpp"

#include <cmath>
#include <utility>

namespace nholo {

namespace {

// order-1 copy of a higher-order jet
Jet to1(const Jet& f) {
  Jet r(1, f.dim(), f.value());
  for (int i = 0; i < f.dim(); ++i) r.grad(i) = f.grad(i);
  return r;
}

// order-1 jet of the plain coordinate partial d_mu f, from an order-2 jet
Jet dpart(const Jet& f2, int mu) {
  Jet r(1, f2.dim(), f2.grad(mu));
  for (int s = 0; s < f2.dim(); ++s) r.grad(s) = f2.hess(mu, s);
  return r;
}

// order-1 jet of e_k f = d_k f - N_k^a d_{y^a} f; nrow[a] is the order-2 jet
// of N_k^a
Jet adapt_h(const Jet& f2, const std::vector<Jet>& nrow, int k, int n, int m) {
  const int dim = f2.dim();
  Jet r(1, dim, f2.grad(k));
  for (int a = 0; a < m; ++a) r.value() -= nrow[a].value() * f2.grad(n + a);
  for (int s = 0; s < dim; ++s) {
    double d = f2.hess(k, s);
    for (int a = 0; a < m; ++a)
      d -= nrow[a].grad(s) * f2.grad(n + a) +
           nrow[a].value() * f2.hess(n + a, s);
    r.grad(s) = d;
  }
  return r;
}

// value of the adapted derivative e_dir of an order-1 coefficient jet;
// nval(a, k) are the N coefficient values at the point
double adapt_val(const Jet& f1, int dir, const Matrix& nval, int n, int m) {
  if (dir >= n) return f1.grad(dir);
  double d = f1.grad(dir);
  for (int a = 0; a < m; ++a) d -= nval.at(a, dir) * f1.grad(n + a);
  return d;
}

Matrix n_values(const NConnection& ncon, const Point& p) {
  Matrix nv(ncon.m(), ncon.n());
  for (int a = 0; a < ncon.m(); ++a)
    for (int i = 0; i < ncon.n(); ++i)
      nv.at(a, i) = evaluate(ncon.at(a, i), p);
  return nv;
}

}  // namespace

DMetric diagonal_dmetric(const Chart& chart, std::vector<ScalarField> gdiag,
                         std::vector<ScalarField> hdiag, NConnection ncon) {
  const int n = chart.n(), m = chart.m();
  if (static_cast<int>(gdiag.size()) != n ||
      static_cast<int>(hdiag.size()) != m)
    throw Error("diagonal metric needs n h-entries and m v-entries");
  std::vector<ScalarField> g(n * n, constant(chart, 0.0));
  std::vector<ScalarField> h(m * m, constant(chart, 0.0));
  for (int i = 0; i < n; ++i) g[i * n + i] = std::move(gdiag[i]);
  for (int a = 0; a < m; ++a) h[a * m + a] = std::move(hdiag[a]);
  return DMetric{chart, std::move(g), std::move(h), std::move(ncon)};
}

ConnBlocks::ConnBlocks(int n_, int m_, int dim)
    : n(n_),
      m(m_),
      lh(n_ * n_ * n_, Jet(1, dim)),
      lv(m_ * m_ * n_, Jet(1, dim)),
      ch(n_ * n_ * m_, Jet(1, dim)),
      cv(m_ * m_ * m_, Jet(1, dim)) {}

Jet ConnBlocks::gamma(int g, int a, int b) const {
  const bool gh = g < n, ah = a < n, bh = b < n;
  if (gh && ah && bh) return Lh(g, a, b);
  if (!gh && !ah && bh) return Lv(g - n, a - n, b);
  if (gh && ah && !bh) return Ch(g, a, b - n);
  if (!gh && !ah && !bh) return Cv(g - n, a - n, b - n);
  return Jet(1, n + m);
}

DConnection::DConnection(Chart chart,
                         std::function<ConnBlocks(const Point&)> eval)
    : chart_(std::move(chart)), eval_(std::move(eval)) {}

DTensor::DTensor(std::vector<IndexDesc> desc, int n, int m)
    : desc_(std::move(desc)) {
  int total = 1;
  for (const auto& d : desc_) {
    ext_.push_back(d.horizontal ? n : m);
    total *= ext_.back();
  }
  a_.assign(total, 0.0);
}

int DTensor::offset(const std::vector<int>& idx) const {
  if (idx.size() != ext_.size()) throw Error("DTensor index rank mismatch");
  int o = 0;
  for (size_t s = 0; s < idx.size(); ++s) {
    if (idx[s] < 0 || idx[s] >= ext_[s])
      throw Error("DTensor index out of range");
    o = o * ext_[s] + idx[s];
  }
  return o;
}

double& DTensor::at(const std::vector<int>& idx) { return a_[offset(idx)]; }
double DTensor::at(const std::vector<int>& idx) const {
  return a_[offset(idx)];
}

Matrix assemble_coordinate_metric(const DMetric& dm, const Point& p) {
  const int n = dm.chart.n(), m = dm.chart.m(), dim = n + m;
  Matrix g(n, n), h(m, m), nv(m, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.at(i, j) = evaluate(dm.gat(i, j), p);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) h.at(a, b) = evaluate(dm.hat(a, b), p);
  nv = n_values(dm.ncon, p);

  Matrix full(dim, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = g.at(i, j);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          v += nv.at(a, i) * nv.at(b, j) * h.at(a, b);
      full.at(i, j) = v;
    }
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      double v = 0;
      for (int b = 0; b < m; ++b) v += nv.at(b, i) * h.at(b, a);
      full.at(i, n + a) = v;
      full.at(n + a, i) = v;
    }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) full.at(n + a, n + b) = h.at(a, b);
  return full;
}

void extract_blocks(const Matrix& full, int n, int m, Matrix* g, Matrix* h,
                    Matrix* ncoef) {
  if (full.rows != n + m || full.cols != n + m)
    throw Error("extract_blocks: shape mismatch");
  Matrix hb(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) hb.at(a, b) = full.at(n + a, n + b);
  Matrix hinv = matrix_inverse(hb);

  Matrix nv(m, n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      double v = 0;
      for (int b = 0; b < m; ++b) v += hinv.at(a, b) * full.at(i, n + b);
      nv.at(a, i) = v;
    }
  Matrix gb(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = full.at(i, j);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          v -= nv.at(a, i) * nv.at(b, j) * hb.at(a, b);
      gb.at(i, j) = v;
    }
  if (g) *g = gb;
  if (h) *h = hb;
  if (ncoef) *ncoef = nv;
}

DConnection canonical_dconnection(const DMetric& dm) {
  Chart chart = dm.chart;
  return DConnection(chart, [dm](const Point& p) -> ConnBlocks {
    const int n = dm.chart.n(), m = dm.chart.m(), dim = n + m;

    std::vector<Jet> gj(n * n), hj(m * m), nj(m * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gj[i * n + j] = jet_eval(dm.gat(i, j), p, 2);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) hj[a * m + b] = jet_eval(dm.hat(a, b), p, 2);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < n; ++i) nj[a * n + i] = jet_eval(dm.ncon.at(a, i), p, 2);

    JetMatrix g1(n, n, 1, dim), h1m(m, m, 1, dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g1.at(i, j) = to1(gj[i * n + j]);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) h1m.at(a, b) = to1(hj[a * m + b]);
    JetMatrix ginv = jet_matrix_inverse(g1, 1e10);
    JetMatrix hinv = jet_matrix_inverse(h1m, 1e10);

    // adapted and fiber derivatives of the metric blocks, all order-1 jets
    auto nrow = [&](int k) {
      std::vector<Jet> r(m);
      for (int a = 0; a < m; ++a) r[a] = nj[a * n + k];
      return r;
    };
    std::vector<std::vector<Jet>> ehg(n), dvg(m), ehh(n), dvh(m), dvN(m);
    for (int k = 0; k < n; ++k) {
      auto row = nrow(k);
      ehg[k].resize(n * n);
      ehh[k].resize(m * m);
      for (int x = 0; x < n * n; ++x) ehg[k][x] = adapt_h(gj[x], row, k, n, m);
      for (int x = 0; x < m * m; ++x) ehh[k][x] = adapt_h(hj[x], row, k, n, m);
    }
    for (int c = 0; c < m; ++c) {
      dvg[c].resize(n * n);
      dvh[c].resize(m * m);
      dvN[c].resize(m * n);
      for (int x = 0; x < n * n; ++x) dvg[c][x] = dpart(gj[x], n + c);
      for (int x = 0; x < m * m; ++x) dvh[c][x] = dpart(hj[x], n + c);
      for (int x = 0; x < m * n; ++x) dvN[c][x] = dpart(nj[x], n + c);
    }

    ConnBlocks cb(n, m, dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Jet s(1, dim);
          for (int r = 0; r < n; ++r)
            s = s + ginv.at(i, r) * (ehg[k][j * n + r] + ehg[j][k * n + r] -
                                     ehg[r][j * n + k]);
          cb.Lh(i, j, k) = 0.5 * s;
        }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int k = 0; k < n; ++k) {
          Jet s(1, dim);
          for (int c = 0; c < m; ++c) {
            Jet t = ehh[k][b * m + c];
            for (int d = 0; d < m; ++d)
              t = t - dvN[b][d * n + k] * h1m.at(d, c) -
                  dvN[c][d * n + k] * h1m.at(d, b);
            s = s + hinv.at(a, c) * t;
          }
          cb.Lv(a, b, k) = dvN[b][a * n + k] + 0.5 * s;
        }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int c = 0; c < m; ++c) {
          Jet s(1, dim);
          for (int k = 0; k < n; ++k)
            s = s + ginv.at(i, k) * dvg[c][j * n + k];
          cb.Ch(i, j, c) = 0.5 * s;
        }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c) {
          Jet s(1, dim);
          for (int d = 0; d < m; ++d)
            s = s + hinv.at(a, d) * (dvh[c][b * m + d] + dvh[b][c * m + d] -
                                     dvh[d][b * m + c]);
          cb.Cv(a, b, c) = 0.5 * s;
        }
    return cb;
  });
}

DConnection deform(const DConnection& base, const Chart& chart,
                   DeformBlocks pb) {
  return DConnection(chart, [base, pb](const Point& p) -> ConnBlocks {
    ConnBlocks cb = base.eval(p);
    auto add = [&](std::vector<Jet>& dst, const std::vector<ScalarField>& src) {
      if (src.empty()) return;
      if (src.size() != dst.size())
        throw Error("deformation block shape mismatch");
      for (size_t x = 0; x < dst.size(); ++x)
        if (!src[x].empty()) dst[x] = dst[x] + jet_eval(src[x], p, 1);
    };
    add(cb.lh, pb.lh);
    add(cb.lv, pb.lv);
    add(cb.ch, pb.ch);
    add(cb.cv, pb.cv);
    return cb;
  });
}

DTorsion d_torsion(const DConnection& dc, const NConnection& ncon,
                   const Point& p) {
  const int n = ncon.n(), m = ncon.m();
  ConnBlocks cb = dc.eval(p);
  NCurvature om = n_curvature(ncon, p);

  DTorsion t;
  t.n = n;
  t.m = m;
  t.hhh.resize(n * n * n);
  t.hhv.resize(n * n * m);
  t.vhh.resize(m * n * n);
  t.vvh.resize(m * m * n);
  t.vvv.resize(m * m * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        t.hhh[(i * n + j) * n + k] =
            cb.Lh(i, j, k).value() - cb.Lh(i, k, j).value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < m; ++a)
        t.hhv[(i * n + j) * m + a] = cb.Ch(i, j, a).value();
  for (int a = 0; a < m; ++a)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        t.vhh[(a * n + j) * n + i] = om.at(a, j, i);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < n; ++i)
        t.vvh[(a * m + b) * n + i] =
            evaluate(differentiate(ncon.at(a, i), n + b), p) -
            cb.Lv(a, b, i).value();
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        t.vvv[(a * m + b) * m + c] =
            cb.Cv(a, b, c).value() - cb.Cv(a, c, b).value();
  return t;
}

double torsion_form_oracle(const DConnection& dc, const NConnection& ncon,
                           int alpha, int beta, int gamma, const Point& p) {
  ConnBlocks cb = dc.eval(p);
  Anholonomy w = anholonomy(ncon, p);
  return cb.gamma(alpha, beta, gamma).value() -
         cb.gamma(alpha, gamma, beta).value() - w.at(alpha, gamma, beta);
}

DCurvature d_curvature(const DConnection& dc, const NConnection& ncon,
                       const Point& p) {
  const int n = ncon.n(), m = ncon.m();
  ConnBlocks cb = dc.eval(p);
  NCurvature om = n_curvature(ncon, p);
  Matrix nv = n_values(ncon, p);
  // dN(b, a, k) = dN_k^a / dy^b values
  std::vector<double> dN(m * m * n);
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a)
      for (int k = 0; k < n; ++k)
        dN[(b * m + a) * n + k] =
            evaluate(differentiate(ncon.at(a, k), n + b), p);

  auto eh = [&](const Jet& f, int k) { return adapt_val(f, k, nv, n, m); };
  auto ev = [&](const Jet& f, int a) { return f.grad(n + a); };
  // mixed torsion factor entering the third and fourth blocks
  auto tmix = [&](int b, int k, int a) {
    return dN[(a * m + b) * n + k] - cb.Lv(b, a, k).value();
  };

  DCurvature r;
  r.n = n;
  r.m = m;
  r.b1.resize(n * n * n * n);
  r.b2.resize(m * m * n * n);
  r.b3.resize(n * n * n * m);
  r.b4.resize(m * m * n * m);
  r.b5.resize(n * n * m * m);
  r.b6.resize(m * m * m * m);

  for (int i = 0; i < n; ++i)
    for (int h = 0; h < n; ++h)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = eh(cb.Lh(i, h, j), k) - eh(cb.Lh(i, h, k), j);
          for (int mm = 0; mm < n; ++mm)
            v += cb.Lh(mm, h, j).value() * cb.Lh(i, mm, k).value() -
                 cb.Lh(mm, h, k).value() * cb.Lh(i, mm, j).value();
          for (int a = 0; a < m; ++a)
            v -= cb.Ch(i, h, a).value() * om.at(a, k, j);
          r.b1[((i * n + h) * n + j) * n + k] = v;
        }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = eh(cb.Lv(a, b, j), k) - eh(cb.Lv(a, b, k), j);
          for (int c = 0; c < m; ++c)
            v += cb.Lv(c, b, j).value() * cb.Lv(a, c, k).value() -
                 cb.Lv(c, b, k).value() * cb.Lv(a, c, j).value();
          for (int c = 0; c < m; ++c)
            v -= cb.Cv(a, b, c).value() * om.at(c, k, j);
          r.b2[((a * m + b) * n + j) * n + k] = v;
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int a = 0; a < m; ++a) {
          // D_k C^i_ja: upper h index via L^i, lower h via L^m_jk, lower v
          // via L^b_ak
          double dkc = eh(cb.Ch(i, j, a), k);
          for (int mm = 0; mm < n; ++mm)
            dkc += cb.Lh(i, mm, k).value() * cb.Ch(mm, j, a).value() -
                   cb.Lh(mm, j, k).value() * cb.Ch(i, mm, a).value();
          for (int b = 0; b < m; ++b)
            dkc -= cb.Lv(b, a, k).value() * cb.Ch(i, j, b).value();
          double v = ev(cb.Lh(i, j, k), a) - dkc;
          for (int b = 0; b < m; ++b)
            v += cb.Ch(i, j, b).value() * tmix(b, k, a);
          r.b3[((i * n + j) * n + k) * m + a] = v;
        }
  for (int c = 0; c < m; ++c)
    for (int b = 0; b < m; ++b)
      for (int k = 0; k < n; ++k)
        for (int a = 0; a < m; ++a) {
          double dkc = eh(cb.Cv(c, b, a), k);
          for (int d = 0; d < m; ++d)
            dkc += cb.Lv(c, d, k).value() * cb.Cv(d, b, a).value() -
                   cb.Lv(d, b, k).value() * cb.Cv(c, d, a).value() -
                   cb.Lv(d, a, k).value() * cb.Cv(c, b, d).value();
          double v = ev(cb.Lv(c, b, k), a) - dkc;
          for (int d = 0; d < m; ++d)
            v += cb.Cv(c, b, d).value() * tmix(d, k, a);
          r.b4[((c * m + b) * n + k) * m + a] = v;
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c) {
          double v = ev(cb.Ch(i, j, b), c) - ev(cb.Ch(i, j, c), b);
          for (int h = 0; h < n; ++h)
            v += cb.Ch(h, j, b).value() * cb.Ch(i, h, c).value() -
                 cb.Ch(h, j, c).value() * cb.Ch(i, h, b).value();
          r.b5[((i * n + j) * m + b) * m + c] = v;
        }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          double v = ev(cb.Cv(a, b, c), d) - ev(cb.Cv(a, b, d), c);
          for (int e = 0; e < m; ++e)
            v += cb.Cv(e, b, c).value() * cb.Cv(a, e, d).value() -
                 cb.Cv(e, b, d).value() * cb.Cv(a, e, c).value();
          r.b6[((a * m + b) * m + c) * m + d] = v;
        }
  return r;
}

std::vector<double> curvature_commutator_oracle(const DConnection& dc,
                                                const NConnection& ncon,
                                                int alpha, int beta,
                                                const std::vector<double>& z,
                                                const Point& p) {
  const int n = ncon.n(), m = ncon.m(), dim = n + m;
  if (static_cast<int>(z.size()) != dim)
    throw Error("oracle vector must have n+m components");
  ConnBlocks cb = dc.eval(p);
  Anholonomy w = anholonomy(ncon, p);
  Matrix nv = n_values(ncon, p);

  // (D_b z)^g for constant adapted components z
  auto cov = [&](int g, int b) {
    double s = 0;
    for (int sg = 0; sg < dim; ++sg) s += cb.gamma(g, sg, b).value() * z[sg];
    return s;
  };
  // e_x (D_b z)^g via the jet slots of the coefficients
  auto dcov = [&](int g, int b, int x) {
    double s = 0;
    for (int sg = 0; sg < dim; ++sg)
      s += adapt_val(cb.gamma(g, sg, b), x, nv, n, m) * z[sg];
    return s;
  };

  std::vector<double> out(dim, 0.0);
  for (int g = 0; g < dim; ++g) {
    double v = dcov(g, beta, alpha) - dcov(g, alpha, beta);
    for (int t = 0; t < dim; ++t)
      v += cb.gamma(g, t, alpha).value() * cov(t, beta) -
           cb.gamma(g, t, beta).value() * cov(t, alpha);
    for (int sg = 0; sg < dim; ++sg) v -= w.at(sg, alpha, beta) * cov(g, sg);
    out[g] = v;
  }
  return out;
}

double RicciResult::max_ricci() const {
  double worst = 0;
  for (double v : ric_hh.e) worst = std::max(worst, std::fabs(v));
  for (double v : ric_hv.e) worst = std::max(worst, std::fabs(v));
  for (double v : ric_vh.e) worst = std::max(worst, std::fabs(v));
  for (double v : ric_vv.e) worst = std::max(worst, std::fabs(v));
  return worst;
}

RicciResult ricci_scalar_einstein(const DConnection& dc, const DMetric& dm,
                                  const Point& p) {
  const int n = dm.chart.n(), m = dm.chart.m(), dim = n + m;
  DCurvature rc = d_curvature(dc, dm.ncon, p);

  RicciResult out;
  out.ric_hh = Matrix(n, n);
  out.ric_hv = Matrix(n, m);
  out.ric_vh = Matrix(m, n);
  out.ric_vv = Matrix(m, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0;
      for (int k = 0; k < n; ++k) v += rc.R1(k, i, j, k);
      out.ric_hh.at(i, j) = v;
    }
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      double v = 0;
      for (int k = 0; k < n; ++k) v -= rc.R3(k, i, k, a);
      out.ric_hv.at(i, a) = v;
    }
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) {
      double v = 0;
      for (int b = 0; b < m; ++b) v += rc.R4(b, a, i, b);
      out.ric_vh.at(a, i) = v;
    }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double v = 0;
      for (int c = 0; c < m; ++c) v += rc.R6(c, a, b, c);
      out.ric_vv.at(a, b) = v;
    }

  Matrix g(n, n), h(m, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.at(i, j) = evaluate(dm.gat(i, j), p);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) h.at(a, b) = evaluate(dm.hat(a, b), p);
  Matrix ginv = matrix_inverse(g, 1e10);
  Matrix hinv = matrix_inverse(h, 1e10);
  double scalar = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scalar += ginv.at(i, j) * out.ric_hh.at(i, j);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) scalar += hinv.at(a, b) * out.ric_vv.at(a, b);
  out.scalar = scalar;

  out.einstein = Matrix(dim, dim);
  for (int x = 0; x < dim; ++x)
    for (int y = 0; y < dim; ++y) {
      double ric, met;
      if (x < n && y < n) {
        ric = out.ric_hh.at(x, y);
        met = g.at(x, y);
      } else if (x < n) {
        ric = out.ric_hv.at(x, y - n);
        met = 0;
      } else if (y < n) {
        ric = out.ric_vh.at(x - n, y);
        met = 0;
      } else {
        ric = out.ric_vv.at(x - n, y - n);
        met = h.at(x - n, y - n);
      }
      out.einstein.at(x, y) = ric - 0.5 * met * scalar;
    }
  return out;
}

namespace {

// symbolic entries of the assembled coordinate metric
std::vector<ScalarField> assembled_fields(const DMetric& dm) {
  const int n = dm.chart.n(), m = dm.chart.m(), dim = n + m;
  std::vector<ScalarField> G(dim * dim, constant(dm.chart, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ScalarField v = dm.gat(i, j);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          v = v + dm.ncon.at(a, i) * dm.ncon.at(b, j) * dm.hat(a, b);
      G[i * dim + j] = simplify(v);
    }
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      ScalarField v = constant(dm.chart, 0.0);
      for (int b = 0; b < m; ++b) v = v + dm.ncon.at(b, i) * dm.hat(b, a);
      v = simplify(v);
      G[i * dim + (n + a)] = v;
      G[(n + a) * dim + i] = v;
    }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) G[(n + a) * dim + (n + b)] = dm.hat(a, b);
  return G;
}

}  // namespace

LCDeformation levi_civita_and_deformation(const DMetric& dm, const Point& p) {
  const int n = dm.chart.n(), m = dm.chart.m(), dim = n + m;
  std::vector<ScalarField> Gf = assembled_fields(dm);

  // coordinate Christoffel values
  std::vector<Jet> Gj(dim * dim);
  for (int x = 0; x < dim * dim; ++x) Gj[x] = jet_eval(Gf[x], p, 1);
  Matrix Gv(dim, dim);
  for (int x = 0; x < dim; ++x)
    for (int y = 0; y < dim; ++y) Gv.at(x, y) = Gj[x * dim + y].value();
  Matrix Ginv = matrix_inverse(Gv, 1e10);
  std::vector<double> chris(dim * dim * dim);  // [lam][mu][nu]
  for (int lam = 0; lam < dim; ++lam)
    for (int mu = 0; mu < dim; ++mu)
      for (int nu = 0; nu < dim; ++nu) {
        double s = 0;
        for (int rho = 0; rho < dim; ++rho)
          s += Ginv.at(lam, rho) *
               (Gj[rho * dim + nu].grad(mu) + Gj[rho * dim + mu].grad(nu) -
                Gj[mu * dim + nu].grad(rho));
        chris[(lam * dim + mu) * dim + nu] = 0.5 * s;
      }

  // frame matrices: e_alpha = A^mu_alpha d_mu, d_mu = Bt^gamma_mu e_gamma
  std::vector<Jet> nj(m * n);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) nj[a * n + i] = jet_eval(dm.ncon.at(a, i), p, 1);
  auto A = [&](int mu, int alpha) -> double {
    if (mu < n) return mu == alpha ? 1.0 : 0.0;
    if (alpha < n) return -nj[(mu - n) * n + alpha].value();
    return mu == alpha ? 1.0 : 0.0;
  };
  auto dA = [&](int nu, int mu, int alpha) -> double {
    if (mu >= n && alpha < n) return -nj[(mu - n) * n + alpha].grad(nu);
    return 0.0;
  };
  auto Bt = [&](int g, int mu) -> double {
    if (mu < n) {
      if (g < n) return g == mu ? 1.0 : 0.0;
      return nj[(g - n) * n + mu].value();
    }
    return g == mu ? 1.0 : 0.0;
  };

  LCDeformation out;
  out.dim = dim;
  out.nabla.assign(dim * dim * dim, 0.0);
  for (int g = 0; g < dim; ++g)
    for (int alpha = 0; alpha < dim; ++alpha)
      for (int beta = 0; beta < dim; ++beta) {
        double s = 0;
        for (int lam = 0; lam < dim; ++lam) {
          double bl = Bt(g, lam);
          if (bl == 0.0) continue;
          for (int nu = 0; nu < dim; ++nu) {
            double an = A(nu, beta);
            if (an == 0.0) continue;
            double t = dA(nu, lam, alpha);
            for (int mu = 0; mu < dim; ++mu)
              t += A(mu, alpha) * chris[(lam * dim + mu) * dim + nu];
            s += bl * an * t;
          }
        }
        out.nabla[(g * dim + alpha) * dim + beta] = s;
      }

  // deformation on the d-blocks: P^i_jc = -(1/2) g^{ik} Om^a_kj h_ca; the
  // remaining canonical blocks coincide with the transformed Levi-Civita
  // coefficients directly
  out.phat.assign(dim * dim * dim, 0.0);
  NCurvature om = n_curvature(dm.ncon, p);
  Matrix g(n, n), h(m, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.at(i, j) = evaluate(dm.gat(i, j), p);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) h.at(a, b) = evaluate(dm.hat(a, b), p);
  Matrix ginv = matrix_inverse(g, 1e10);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < m; ++c) {
        double s = 0;
        for (int k = 0; k < n; ++k)
          for (int a = 0; a < m; ++a)
            s += ginv.at(i, k) * om.at(a, k, j) * h.at(c, a);
        out.phat[(i * dim + j) * dim + (n + c)] = -0.5 * s;
      }

  // compare against the canonical coefficients on the four d-blocks
  ConnBlocks cb = canonical_dconnection(dm).eval(p);
  double worst = 0;
  auto cmp = [&](int g_, int a_, int b_, double want) {
    double got = out.nabla[(g_ * dim + a_) * dim + b_] +
                 out.phat[(g_ * dim + a_) * dim + b_];
    worst = std::max(worst, std::fabs(got - want));
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) cmp(i, j, k, cb.Lh(i, j, k).value());
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int k = 0; k < n; ++k)
        cmp(n + a, n + b, k, cb.Lv(a, b, k).value());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < m; ++c) cmp(i, j, n + c, cb.Ch(i, j, c).value());
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        cmp(n + a, n + b, n + c, cb.Cv(a, b, c).value());
  out.residual = worst;
  return out;
}

Matrix levi_civita_ricci(const DMetric& dm, const Point& p) {
  const int n = dm.chart.n(), m = dm.chart.m(), dim = n + m;
  std::vector<ScalarField> Gf = assembled_fields(dm);
  std::vector<Jet> Gj(dim * dim);
  for (int x = 0; x < dim * dim; ++x) Gj[x] = jet_eval(Gf[x], p, 2);

  JetMatrix G1(dim, dim, 1, dim);
  for (int x = 0; x < dim; ++x)
    for (int y = 0; y < dim; ++y) G1.at(x, y) = to1(Gj[x * dim + y]);
  JetMatrix Ginv = jet_matrix_inverse(G1, 1e10);

  // Christoffels as order-1 jets
  std::vector<Jet> chris(dim * dim * dim, Jet(1, dim));
  for (int lam = 0; lam < dim; ++lam)
    for (int mu = 0; mu < dim; ++mu)
      for (int nu = 0; nu <= mu; ++nu) {
        Jet s(1, dim);
        for (int rho = 0; rho < dim; ++rho)
          s = s + Ginv.at(lam, rho) *
                      (dpart(Gj[rho * dim + nu], mu) +
                       dpart(Gj[rho * dim + mu], nu) -
                       dpart(Gj[mu * dim + nu], rho));
        chris[(lam * dim + mu) * dim + nu] = 0.5 * s;
        chris[(lam * dim + nu) * dim + mu] = 0.5 * s;
      }
  auto ch = [&](int l, int mu, int nu) -> const Jet& {
    return chris[(l * dim + mu) * dim + nu];
  };

  Matrix ric(dim, dim);
  for (int mu = 0; mu < dim; ++mu)
    for (int nu = 0; nu < dim; ++nu) {
      double v = 0;
      for (int lam = 0; lam < dim; ++lam)
        v += ch(lam, mu, nu).grad(lam) - ch(lam, mu, lam).grad(nu);
      for (int lam = 0; lam < dim; ++lam)
        for (int sg = 0; sg < dim; ++sg)
          v += ch(lam, sg, lam).value() * ch(sg, mu, nu).value() -
               ch(lam, sg, nu).value() * ch(sg, mu, lam).value();
      ric.at(mu, nu) = v;
    }
  return ric;
}

namespace {

// theta components over flat adapted indices for the m = n model:
// theta(e_i, ve_j) = g_ij, theta(ve_i, e_j) = -g_ij, zero otherwise.
// sign(x, y) and the field index are returned; empty field means zero.
struct ThetaFields {
  int n = 0, dim = 0;
  const DMetric* dm = nullptr;

  bool zero(int x, int y) const { return (x < n) == (y < n); }
  double sign(int x) const { return x < n ? 1.0 : -1.0; }
  const ScalarField& field(int x, int y) const {
    return x < n ? dm->gat(x, y - n) : dm->gat(y, x - n);
  }
  double value(int x, int y, const Point& p) const {
    return zero(x, y) ? 0.0 : sign(x) * evaluate(field(x, y), p);
  }
  double ederiv(const NConnection& ncon, int g, int x, int y,
                const Point& p) const {
    if (zero(x, y)) return 0.0;
    FrameIndex fg = g < n ? FrameIndex::h(g) : FrameIndex::v(g - n);
    return sign(x) * adapted_derivative(ncon, field(x, y), fg, p);
  }
};

}  // namespace

SymmetrizeResult symmetrize_reconstruct(const DConnection& dc,
                                        const DMetric& dm, const Point& p) {
  const int n = dm.chart.n(), m = dm.chart.m(), dim = n + m;
  if (n != m) throw Error("symmetrize_reconstruct requires an m = n chart");
  ConnBlocks cb = dc.eval(p);
  ThetaFields th{n, dim, &dm};

  SymmetrizeResult out;
  out.dim = dim;
  out.sym.assign(dim * dim * dim, 0.0);
  out.lowered.assign(dim * dim * dim, 0.0);
  out.rebuilt.assign(dim * dim * dim, 0.0);

  for (int g = 0; g < dim; ++g)
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        out.sym[(g * dim + a) * dim + b] =
            0.5 * (cb.gamma(g, a, b).value() + cb.gamma(g, b, a).value());

  // theta values and adapted derivatives
  std::vector<double> tv(dim * dim), et(dim * dim * dim);
  for (int x = 0; x < dim; ++x)
    for (int y = 0; y < dim; ++y) tv[x * dim + y] = th.value(x, y, p);
  for (int g = 0; g < dim; ++g)
    for (int x = 0; x < dim; ++x)
      for (int y = 0; y < dim; ++y)
        et[(g * dim + x) * dim + y] = th.ederiv(dm.ncon, g, x, y, p);
  auto eth = [&](int g, int x, int y) { return et[(g * dim + x) * dim + y]; };

  // lowered objects: low[x][y][z] = theta_{x tau} T^tau_{y z}
  auto lower = [&](const std::vector<double>& t, std::vector<double>& low) {
    for (int x = 0; x < dim; ++x)
      for (int y = 0; y < dim; ++y)
        for (int z = 0; z < dim; ++z) {
          double s = 0;
          for (int tau = 0; tau < dim; ++tau)
            s += tv[x * dim + tau] * t[(tau * dim + y) * dim + z];
          low[(x * dim + y) * dim + z] = s;
        }
  };
  std::vector<double> gam(dim * dim * dim), slow(dim * dim * dim);
  for (int g = 0; g < dim; ++g)
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        gam[(g * dim + a) * dim + b] = cb.gamma(g, a, b).value();
  lower(gam, out.lowered);
  lower(out.sym, slow);
  auto S = [&](int x, int y, int z) { return slow[(x * dim + y) * dim + z]; };

  // cyclic closedness residual of theta under adapted derivatives
  double a2 = 0;
  for (int g = 0; g < dim; ++g)
    for (int x = 0; x < dim; ++x)
      for (int y = 0; y < dim; ++y)
        a2 = std::max(a2,
                      std::fabs(eth(g, x, y) + eth(x, y, g) + eth(y, g, x)));
  out.a2_residual = a2;

  const bool nsymplectic = a2 <= 1e-8;
  double worst = 0;
  for (int x = 0; x < dim; ++x)
    for (int y = 0; y < dim; ++y)
      for (int z = 0; z < dim; ++z) {
        double v;
        if (nsymplectic) {
          v = eth(x, z, y);
        } else {
          v = 0.5 * (eth(x, z, y) - eth(z, y, x) - eth(y, x, z));
        }
        v += S(x, y, z) - S(z, y, x) + S(y, z, x);
        out.rebuilt[(x * dim + y) * dim + z] = v;
        worst = std::max(
            worst, std::fabs(v - out.lowered[(x * dim + y) * dim + z]));
      }
  out.residual = worst;
  return out;
}

CompatResiduals compat_residuals(const DConnection& dc, const DMetric& dm,
                                 const Point& p) {
  const int n = dm.chart.n(), m = dm.chart.m(), dim = n + m;
  ConnBlocks cb = dc.eval(p);

  // adapted block metric as fields: gad[x][y]
  auto gad_field = [&](int x, int y) -> const ScalarField* {
    if (x < n && y < n) return &dm.gat(x, y);
    if (x >= n && y >= n) return &dm.hat(x - n, y - n);
    return nullptr;
  };
  std::vector<double> gv(dim * dim, 0.0);
  for (int x = 0; x < dim; ++x)
    for (int y = 0; y < dim; ++y)
      if (const ScalarField* f = gad_field(x, y)) gv[x * dim + y] = evaluate(*f, p);

  auto ederiv = [&](const ScalarField* f, int g) {
    if (!f) return 0.0;
    FrameIndex fg = g < n ? FrameIndex::h(g) : FrameIndex::v(g - n);
    return adapted_derivative(dm.ncon, *f, fg, p);
  };

  CompatResiduals out;
  for (int g = 0; g < dim; ++g)
    for (int x = 0; x < dim; ++x)
      for (int y = 0; y < dim; ++y) {
        double v = ederiv(gad_field(x, y), g);
        for (int t = 0; t < dim; ++t)
          v -= cb.gamma(t, x, g).value() * gv[t * dim + y] +
               cb.gamma(t, y, g).value() * gv[x * dim + t];
        out.dg = std::max(out.dg, std::fabs(v));
      }

  if (n == m) {
    ThetaFields th{n, dim, &dm};
    std::vector<double> tv(dim * dim), et(dim * dim * dim);
    for (int x = 0; x < dim; ++x)
      for (int y = 0; y < dim; ++y) tv[x * dim + y] = th.value(x, y, p);
    for (int g = 0; g < dim; ++g)
      for (int x = 0; x < dim; ++x)
        for (int y = 0; y < dim; ++y)
          et[(g * dim + x) * dim + y] = th.ederiv(dm.ncon, g, x, y, p);
    for (int g = 0; g < dim; ++g)
      for (int x = 0; x < dim; ++x)
        for (int y = 0; y < dim; ++y) {
          double v = et[(g * dim + x) * dim + y];
          for (int t = 0; t < dim; ++t)
            v -= cb.gamma(t, x, g).value() * tv[t * dim + y] +
                 cb.gamma(t, y, g).value() * tv[x * dim + t];
          out.dtheta = std::max(out.dtheta, std::fabs(v));
          double cyc = et[(g * dim + x) * dim + y] +
                       et[(x * dim + y) * dim + g] +
                       et[(y * dim + g) * dim + x];
          out.a2 = std::max(out.a2, std::fabs(cyc));
        }
  }
  return out;
}

double curvature_deformation_check(const DConnection& base,
                                   const NConnection& ncon,
                                   const DeformBlocks& pb, const Point& p) {
  const int n = ncon.n(), m = ncon.m(), dim = n + m;
  ConnBlocks gb = base.eval(p);
  ConnBlocks pj(n, m, dim);
  auto fill = [&](std::vector<Jet>& dst, const std::vector<ScalarField>& src) {
    if (src.empty()) return;
    if (src.size() != dst.size())
      throw Error("deformation block shape mismatch");
    for (size_t x = 0; x < dst.size(); ++x)
      if (!src[x].empty()) dst[x] = jet_eval(src[x], p, 1);
  };
  fill(pj.lh, pb.lh);
  fill(pj.lv, pb.lv);
  fill(pj.ch, pb.ch);
  fill(pj.cv, pb.cv);

  Anholonomy w = anholonomy(ncon, p);
  Matrix nv = n_values(ncon, p);
  auto ederiv = [&](const Jet& f, int x) { return adapt_val(f, x, nv, n, m); };

  // full-index curvature of a coefficient family given by `G`
  auto rfull = [&](auto&& G, int t, int g, int mu, int nu) {
    double v = ederiv(*G(t, g, nu), mu) - ederiv(*G(t, g, mu), nu);
    for (int s = 0; s < dim; ++s)
      v += G(t, s, mu)->value() * G(s, g, nu)->value() -
           G(t, s, nu)->value() * G(s, g, mu)->value();
    for (int s = 0; s < dim; ++s) v -= w.at(s, mu, nu) * G(t, g, s)->value();
    return v;
  };

  std::vector<Jet> gstore(dim * dim * dim), pstore(dim * dim * dim),
      sstore(dim * dim * dim);
  for (int t = 0; t < dim; ++t)
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) {
        int idx = (t * dim + a) * dim + b;
        gstore[idx] = gb.gamma(t, a, b);
        pstore[idx] = pj.gamma(t, a, b);
        sstore[idx] = gstore[idx] + pstore[idx];
      }
  auto gref = [&](const std::vector<Jet>& v) {
    return [&v, dim = dim](int t, int a, int b) {
      return &v[(t * dim + a) * dim + b];
    };
  };
  auto Gb = gref(gstore);
  auto Gp = gref(pstore);
  auto Gs = gref(sstore);

  double worst = 0;
  for (int t = 0; t < dim; ++t)
    for (int g = 0; g < dim; ++g)
      for (int mu = 0; mu < dim; ++mu)
        for (int nu = 0; nu < dim; ++nu) {
          double whole = rfull(Gs, t, g, mu, nu);
          double baseline = rfull(Gb, t, g, mu, nu);
          // DP term: adapted derivative plus cross contractions with the
          // base, minus the bracket contraction
          double dp = ederiv(*Gp(t, g, nu), mu) - ederiv(*Gp(t, g, mu), nu);
          for (int s = 0; s < dim; ++s)
            dp += Gb(t, s, mu)->value() * Gp(s, g, nu)->value() +
                  Gp(t, s, mu)->value() * Gb(s, g, nu)->value() -
                  Gb(t, s, nu)->value() * Gp(s, g, mu)->value() -
                  Gp(t, s, nu)->value() * Gb(s, g, mu)->value();
          for (int s = 0; s < dim; ++s)
            dp -= w.at(s, mu, nu) * Gp(t, g, s)->value();
          double pp = 0;
          for (int s = 0; s < dim; ++s)
            pp += Gp(t, s, mu)->value() * Gp(s, g, nu)->value() -
                  Gp(t, s, nu)->value() * Gp(s, g, mu)->value();
          worst = std::max(worst, std::fabs(whole - baseline - dp - pp));
        }
  return worst;
}

}  // namespace nholo
