#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nholo/chart.hpp"
#include "nholo/expr.hpp"
#include "nholo/rng.hpp"

namespace nholo::testutil {

inline bool close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

inline bool close_abs(double a, double b, double tol) {
  return std::fabs(a - b) <= tol;
}

/// Random expression trees of bounded depth over the chart's coordinates.
/// Sticks to smooth everywhere-defined pieces so random points stay in
/// domain: +,-,*, sin, cos, exp of damped args, and division by 2+cos(...).
inline ExprPtr random_expr(SplitMix64& rng, const Chart& chart, int depth) {
  if (depth <= 0 || rng.below(5) == 0) {
    if (rng.below(3) == 0)
      return make_number(rng.uniform(-2.0, 2.0));
    return make_coord(static_cast<int>(rng.below(chart.dim())));
  }
  switch (rng.below(7)) {
    case 0:
      return make_binary('+', random_expr(rng, chart, depth - 1),
                         random_expr(rng, chart, depth - 1));
    case 1:
      return make_binary('-', random_expr(rng, chart, depth - 1),
                         random_expr(rng, chart, depth - 1));
    case 2:
      return make_binary('*', random_expr(rng, chart, depth - 1),
                         random_expr(rng, chart, depth - 1));
    case 3:
      return make_call(Func::Sin, random_expr(rng, chart, depth - 1));
    case 4:
      return make_call(Func::Cos, random_expr(rng, chart, depth - 1));
    case 5:
      // keep exp args bounded via sin
      return make_call(Func::Exp,
                       make_call(Func::Sin, random_expr(rng, chart, depth - 1)));
    default:
      return make_binary(
          '/', random_expr(rng, chart, depth - 1),
          make_binary('+', make_number(2.0),
                      make_call(Func::Cos, random_expr(rng, chart, depth - 1))));
  }
}

inline ScalarField random_field(SplitMix64& rng, const Chart& chart,
                                int depth) {
  return ScalarField(chart, random_expr(rng, chart, depth));
}

inline Point random_point(SplitMix64& rng, const Chart& chart, double lo = -1.5,
                          double hi = 1.5) {
  std::vector<double> u(chart.dim());
  for (auto& x : u) x = rng.uniform(lo, hi);
  return Point(std::move(u));
}

}  // namespace nholo::testutil
