#include <cmath>
#include <numbers>

#include "pinnlab/errors.hpp"
#include "refsol/internal.hpp"

namespace pinnlab::refsol {

double helmholtz_exact(double x, double y, double a1, double a2) {
  const double pi = std::numbers::pi;
  return std::sin(a1 * pi * x) * std::sin(a2 * pi * y);
}

ad::Jet helmholtz_exact_jet(double x, double y, int order, double a1, double a2) {
  const double pi = std::numbers::pi;
  const auto X = ad::Jet::variable(x, 0, 2, order);
  const auto Y = ad::Jet::variable(y, 1, 2, order);
  return sin(X * (a1 * pi)) * sin(Y * (a2 * pi));
}

ReferenceGrid helmholtz_grid(int res, double a1, double a2) {
  if (res < 2) throw InvalidArgument("grid resolution must be at least 2");
  ReferenceGrid g;
  g.case_id = pde::CaseId::Helmholtz;
  g.resolution = res;
  g.values.resize(static_cast<Eigen::Index>(res) * res);
  detail::rebuild_axes(g, static_cast<std::size_t>(res) * static_cast<std::size_t>(res));
  for (Eigen::Index k = 0; k < g.points.cols(); ++k) g.values[k] = helmholtz_exact(g.points(0, k), g.points(1, k), a1, a2);
  return g;
}

}  // namespace pinnlab::refsol
