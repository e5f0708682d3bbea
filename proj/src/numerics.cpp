#include "nholo/numerics.hpp"

#include <cmath>

namespace nholo {

double integrate_v(const std::function<double(double)>& f, double a, double b,
                   int panels) {
  if (panels < 2 || panels % 2 != 0)
    throw Error("integrate_v: panels must be even and >= 2");
  double h = (b - a) / panels;
  double sum = 0;
  for (int k = 0; k <= panels; ++k) {
    double fv = f(a + k * h);
    if (!std::isfinite(fv))
      throw DomainError("integrate_v: non-finite sample at v=" +
                        std::to_string(a + k * h));
    double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sum += w * fv;
  }
  return sum * h / 3.0;
}

std::vector<double> ode_step_rk4(
    const std::vector<double>& state,
    const std::function<std::vector<double>(const std::vector<double>&)>& rhs,
    double h) {
  auto check = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) throw DomainError("ode_step_rk4: non-finite rhs");
    return v;
  };
  std::size_t d = state.size();
  auto axpy = [d](const std::vector<double>& u, double c,
                  const std::vector<double>& k) {
    std::vector<double> r(d);
    for (std::size_t i = 0; i < d; ++i) r[i] = u[i] + c * k[i];
    return r;
  };
  std::vector<double> k1 = check(rhs(state));
  std::vector<double> k2 = check(rhs(axpy(state, h / 2, k1)));
  std::vector<double> k3 = check(rhs(axpy(state, h / 2, k2)));
  std::vector<double> k4 = check(rhs(axpy(state, h, k3)));
  std::vector<double> r(d);
  for (std::size_t i = 0; i < d; ++i)
    r[i] = state[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return r;
}

}  // namespace nholo
