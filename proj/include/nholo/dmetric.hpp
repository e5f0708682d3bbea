#pragma once

#include <vector>

#include "nholo/expr.hpp"
#include "nholo/nconn.hpp"

namespace nholo {

/// Metric split into an n x n horizontal block g_ij, an m x m vertical block
/// h_ab and an N-connection, all as symbolic fields over the chart.
struct DMetric {
  Chart chart;
  std::vector<ScalarField> g;  // n*n, row major, symmetric
  std::vector<ScalarField> h;  // m*m, row major, symmetric
  NConnection ncon;

  const ScalarField& gat(int i, int j) const { return g[i * chart.n() + j]; }
  const ScalarField& hat(int a, int b) const { return h[a * chart.m() + b]; }
};

/// Block-diagonal d-metric from per-coordinate diagonal entries.
DMetric diagonal_dmetric(const Chart& chart, std::vector<ScalarField> gdiag,
                         std::vector<ScalarField> hdiag, NConnection ncon);

}  // namespace nholo
