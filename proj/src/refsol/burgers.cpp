#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <limits>
#include <mutex>
#include <string>
#include <numbers>

#include "pinnlab/errors.hpp"
#include "pinnlab/refsol.hpp"
#include "refsol/internal.hpp"

namespace pinnlab::refsol {
namespace {

// Orthonormal Hermite recurrence at z, rescaled to avoid overflow. Returns
// p_n / p_{n-1} and log|p_{n-1}|.
struct HermiteEval {
  double ratio;
  double log_prev;
};

HermiteEval hermite(int n, double z) {
  constexpr double kBig = 1e150;
  const double log_big = std::log(kBig);
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25);
  double log_scale = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double next = z * std::sqrt(2.0 / j) * cur - std::sqrt((j - 1.0) / j) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kBig) {
      cur /= kBig;
      prev /= kBig;
      log_scale += log_big;
    }
  }
  return {cur / prev, std::log(std::abs(prev)) + log_scale};
}

GaussHermite compute_gauss_hermite(int n) {
  // Golub-Welsch eigenvalues, then Newton polishing on the recurrence.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int j = 1; j < n; ++j) sub[j - 1] = std::sqrt(j / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("Gauss-Hermite eigenvalue iteration failed");
  GaussHermite gh;
  gh.nodes.resize(static_cast<std::size_t>(n));
  gh.log_weights.resize(static_cast<std::size_t>(n));
  const double s2n = std::sqrt(2.0 * n);
  for (int i = 0; i < n; ++i) {
    double z = es.eigenvalues()[i];
    for (int it = 0; it < 3; ++it) z -= hermite(n, z).ratio / s2n;
    gh.nodes[static_cast<std::size_t>(i)] = z;
    gh.log_weights[static_cast<std::size_t>(i)] = -std::log(static_cast<double>(n)) - 2.0 * hermite(n, z).log_prev;
  }
  return gh;
}

}  // namespace

const GaussHermite& gauss_hermite(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Hermite rule needs at least one node");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussHermite>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermite>(compute_gauss_hermite(n));
  return *slot;
}

ad::Jet burgers_cole_hopf_fixed(double t, double x, int nodes, int order, double nu) {
  using ad::Jet;
  if (t < 0.0) throw InvalidArgument("Cole-Hopf solution needs t >= 0");
  if (t == 0.0 && order > 0) throw InvalidArgument("Cole-Hopf derivatives need t > 0");
  const double pi = std::numbers::pi;
  const GaussHermite& gh = gauss_hermite(nodes);
  const Jet T = Jet::variable(t, 0, 2, order);
  const Jet X = Jet::variable(x, 1, 2, order);
  // u = -int sin(pi y) f(y) G / int f(y) G with y = x - sqrt(4 nu t) z and
  // f(y) = exp(-cos(pi y) / (2 pi nu)); summed in log space.
  const Jet c = t > 0.0 ? sqrt(T * (4.0 * nu)) : Jet::constant(0.0, 2, order);
  const double k = -1.0 / (2.0 * pi * nu);
  std::vector<Jet> y(gh.nodes.size());
  std::vector<Jet> a(gh.nodes.size());
  double amax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    y[i] = X - c * gh.nodes[i];
    a[i] = cos(y[i] * pi) * k + gh.log_weights[i];
    amax = std::max(amax, a[i].value());
  }
  Jet num(2, order), den(2, order);
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    if (a[i].value() - amax < -60.0) continue;
    const Jet e = exp(a[i] - amax);
    den = den + e;
    num = num + sin(y[i] * pi) * e;
  }
  return -(num / den);
}

namespace {

double max_change(const ad::Jet& a, const ad::Jet& b) {
  auto rel = [](double p, double q) { return std::abs(p - q) / std::max(1.0, std::abs(q)); };
  double m = rel(a.value(), b.value());
  for (int i = 0; i < 2; ++i) {
    if (a.order() >= 1) m = std::max(m, rel(a.d(i), b.d(i)));
    for (int j = 0; j < 2; ++j) {
      if (a.order() >= 2) m = std::max(m, rel(a.d(i, j), b.d(i, j)));
      for (int l = 0; l < 2; ++l)
        if (a.order() >= 3) m = std::max(m, rel(a.d(i, j, l), b.d(i, j, l)));
    }
  }
  return m;
}

}  // namespace

ad::Jet burgers_cole_hopf_jet(double t, double x, int order, double nu, int nodes, int node_cap) {
  ad::Jet prev = burgers_cole_hopf_fixed(t, x, nodes, order, nu);
  for (int n = 2 * nodes; n <= node_cap; n *= 2) {
    ad::Jet next = burgers_cole_hopf_fixed(t, x, n, order, nu);
    if (max_change(next, prev) < 1e-8) return next;
    prev = next;
  }
  throw NumericalFailure("Cole-Hopf quadrature did not converge at t=" + std::to_string(t) +
                         ", x=" + std::to_string(x) + " within " + std::to_string(node_cap) + " nodes");
}

double burgers_cole_hopf(double t, double x, int nodes, double nu, int node_cap) {
  return burgers_cole_hopf_jet(t, x, 0, nu, nodes, node_cap).value();
}

ReferenceGrid burgers_grid(int nt, int nx, double nu) {
  if (nt < 2 || nx < 2) throw InvalidArgument("Burgers grid needs at least 2 slices and 2 nodes");
  ReferenceGrid g;
  g.case_id = pde::CaseId::Burgers;
  g.resolution = nx;
  g.values.resize(static_cast<Eigen::Index>(nt) * nx);
  detail::rebuild_axes(g, static_cast<std::size_t>(nt) * static_cast<std::size_t>(nx));
  for (Eigen::Index k = 0; k < g.points.cols(); ++k) {
    g.values[k] = burgers_cole_hopf(g.points(0, k), g.points(1, k), 64, nu);
  }
  return g;
}

}  // namespace pinnlab::refsol
