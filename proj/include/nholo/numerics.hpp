#pragma once

#include <functional>
#include <vector>

#include "nholo/chart.hpp"

namespace nholo {

/// Composite Simpson estimate of the integral of f over [a, b].
/// panels must be even and >= 2; error O(h^4) for smooth f.
double integrate_v(const std::function<double(double)>& f, double a, double b,
                   int panels);

/// One classical 4th-order Runge-Kutta step of u' = rhs(u).
std::vector<double> ode_step_rk4(
    const std::vector<double>& state,
    const std::function<std::vector<double>(const std::vector<double>&)>& rhs,
    double h);

}  // namespace nholo
