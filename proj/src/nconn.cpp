#include "nholo/nconn.hpp"

namespace nholo {

NConnection::NConnection(Chart chart, std::vector<ScalarField> entries)
    : chart_(std::move(chart)), N_(std::move(entries)) {
  if (static_cast<int>(N_.size()) != chart_.n() * chart_.m())
    throw Error("NConnection requires m*n entries");
  for (const auto& f : N_)
    if (f.chart() != chart_)
      throw Error("NConnection entry defined over a different chart");
}

NConnection NConnection::zero(const Chart& chart) {
  std::vector<ScalarField> z(chart.n() * chart.m(), constant(chart, 0.0));
  return NConnection(chart, std::move(z));
}

ScalarField adapted_derivative_field(const NConnection& ncon,
                                     const ScalarField& f, FrameIndex alpha) {
  const Chart& chart = ncon.chart();
  if (f.chart() != chart)
    throw Error("adapted derivative: field chart mismatch");
  int n = chart.n(), m = chart.m();
  if (alpha.kind == FrameIndex::Kind::V)
    return differentiate(f, n + alpha.i);
  ScalarField r = differentiate(f, alpha.i);
  for (int a = 0; a < m; ++a)
    r = r - ncon.at(a, alpha.i) * differentiate(f, n + a);
  return r;
}

double adapted_derivative(const NConnection& ncon, const ScalarField& f,
                          FrameIndex alpha, const Point& p) {
  const Chart& chart = ncon.chart();
  int n = chart.n(), m = chart.m();
  if (alpha.kind == FrameIndex::Kind::V)
    return evaluate(differentiate(f, n + alpha.i), p);
  double r = evaluate(differentiate(f, alpha.i), p);
  for (int a = 0; a < m; ++a)
    r -= evaluate(ncon.at(a, alpha.i), p) * evaluate(differentiate(f, n + a), p);
  return r;
}

NCurvature n_curvature(const NConnection& ncon, const Point& p) {
  const Chart& chart = ncon.chart();
  int n = chart.n(), m = chart.m();
  NCurvature om;
  om.n = n;
  om.m = m;
  om.c.assign(static_cast<std::size_t>(m) * n * n, 0.0);
  // Omega^a_{ij} = e_j N_i^a - e_i N_j^a; the e-derivatives carry the
  // quadratic N dN/dy terms.
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double v = adapted_derivative(ncon, ncon.at(a, i), FrameIndex::h(j), p) -
                   adapted_derivative(ncon, ncon.at(a, j), FrameIndex::h(i), p);
        om.at(a, i, j) = v;
        om.at(a, j, i) = -v;
      }
  return om;
}

Anholonomy anholonomy(const NConnection& ncon, const Point& p) {
  const Chart& chart = ncon.chart();
  int n = chart.n(), m = chart.m(), d = n + m;
  Anholonomy W;
  W.dim = d;
  W.w.assign(static_cast<std::size_t>(d) * d * d, 0.0);
  // [e_i, e_j] = Omega^a_{ij} e_a and [e_i, e_a] = (dN_i^b/dy^a) e_b;
  // all other brackets vanish.
  NCurvature om = n_curvature(ncon, p);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) W.at(n + a, i, j) = om.at(a, i, j);
  for (int b = 0; b < m; ++b)
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a) {
        double v = evaluate(differentiate(ncon.at(b, i), n + a), p);
        W.at(n + b, i, n + a) = v;
        W.at(n + b, n + a, i) = -v;
      }
  return W;
}

double bracket_oracle(const NConnection& ncon, FrameIndex alpha,
                      FrameIndex beta, const ScalarField& f, const Point& p) {
  ScalarField ab =
      adapted_derivative_field(ncon, adapted_derivative_field(ncon, f, beta),
                               alpha);
  ScalarField ba =
      adapted_derivative_field(ncon, adapted_derivative_field(ncon, f, alpha),
                               beta);
  return evaluate(ab, p) - evaluate(ba, p);
}

DVector almost_product(const DVector& x) {
  DVector r = x;
  for (double& v : r.vcomp) v = -v;
  return r;
}

}  // namespace nholo
