#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "pinnlab/autodiff/jet.hpp"
#include "pinnlab/autodiff/loss.hpp"

namespace pinnlab::pde {

enum class CaseId { AllenCahn, Helmholtz, Burgers, Cavity };

/// Accepts "allen-cahn", "helmholtz", "burgers", "cavity". Throws UnknownCase.
CaseId parse_case(std::string_view name);
std::string_view case_name(CaseId id);

struct Interval {
  double lo{0.0};
  double hi{1.0};
  double width() const { return hi - lo; }
};

/// Physical constants and sizes of one benchmark. Inputs are (t, x) for the
/// time-dependent cases and (x, y) otherwise.
struct BenchmarkSpec {
  CaseId id{CaseId::AllenCahn};
  int input_dim{2};
  int outputs{1};
  std::array<Interval, 2> domain{};
  std::array<const char*, 2> axis_names{"t", "x"};
  double epsilon{1e-4};
  double a1{6.0};
  double a2{6.0};
  double k{1.0};
  double nu{1.0 / (100.0 * std::numbers::pi)};
  double reynolds{1000.0};
  double lid_sharpness{50.0};
  std::size_t collocation{25600};
  std::size_t iterations{300000};
  int jet_order{2};
  bool has_initial{false};
};

BenchmarkSpec benchmark(CaseId id);

// Residual operators. They take jets of any scalar type so the same code
// evaluates trained networks, tape variables and analytic fields.

/// u_t - eps u_xx + 5u^3 - 5u with inputs (t, x).
template <class S>
S allen_cahn_residual(const ad::JetT<S>& u, double eps = 1e-4) {
  const S& v = u.value();
  return u.d(0) - S(eps) * u.d(1, 1) + S(5.0) * v * v * v - S(5.0) * v;
}

inline double helmholtz_forcing(double x, double y, double a1 = 6.0, double a2 = 6.0, double k = 1.0) {
  const double pi = std::numbers::pi;
  const double ss = std::sin(a1 * pi * x) * std::sin(a2 * pi * y);
  return -(a1 * pi) * (a1 * pi) * ss - (a2 * pi) * (a2 * pi) * ss + k * ss;
}

/// u_xx + u_yy + k^2 u - q(x, y).
template <class S>
S helmholtz_residual(const ad::JetT<S>& u, double x, double y, double a1 = 6.0, double a2 = 6.0, double k = 1.0) {
  return u.d(0, 0) + u.d(1, 1) + S(k * k) * u.value() - S(helmholtz_forcing(x, y, a1, a2, k));
}

/// u_t + u u_x - nu u_xx with inputs (t, x).
template <class S>
S burgers_residual(const ad::JetT<S>& u, double nu = 1.0 / (100.0 * std::numbers::pi)) {
  return u.d(0) + u.value() * u.d(1) - S(nu) * u.d(1, 1);
}

/// Velocities of a streamfunction jet: u = psi_y, v = -psi_x.
template <class S>
std::array<S, 2> cavity_velocity(const ad::JetT<S>& psi) {
  return {psi.d(1), S(-1.0) * psi.d(0)};
}

/// Steady momentum residuals for streamfunction psi (order 3) and pressure p
/// (order >= 1) at (x, y).
template <class S>
std::array<S, 2> cavity_residuals(const ad::JetT<S>& psi, const ad::JetT<S>& p, double re = 1000.0) {
  const S inv_re(1.0 / re);
  const S u = psi.d(1);
  const S v = S(-1.0) * psi.d(0);
  const S u_x = psi.d(0, 1);
  const S u_y = psi.d(1, 1);
  const S v_x = S(-1.0) * psi.d(0, 0);
  const S v_y = S(-1.0) * psi.d(0, 1);
  const S lap_u = psi.d(0, 0, 1) + psi.d(1, 1, 1);
  const S lap_v = S(-1.0) * (psi.d(0, 0, 0) + psi.d(0, 1, 1));
  return {u * u_x + v * u_y + p.d(0) - inv_re * lap_u, u * v_x + v * v_y + p.d(1) - inv_re * lap_v};
}

/// Smoothed lid speed 1 - cosh(r (x - 1/2)) / cosh(r / 2).
inline double lid_velocity(double x, double r = 50.0) {
  // cosh ratio written with exponentials to stay finite for large r.
  const double a = r * std::abs(x - 0.5), b = 0.5 * r;
  return 1.0 - std::exp(a - b) * (1.0 + std::exp(-2.0 * a)) / (1.0 + std::exp(-2.0 * b));
}

/// Points of one run. Allen-Cahn boundary columns come in (x = -1, x = 1)
/// pairs at equal t.
struct CollocationSet {
  Eigen::MatrixXd interior;
  Eigen::MatrixXd initial;
  Eigen::MatrixXd boundary;
  std::vector<std::size_t> permutation;  // batch order of the interior points
};

struct TraceCounts {
  std::size_t per_segment{256};
  std::size_t initial{512};
};

/// Latin-hypercube interior points (count from `spec` unless `interior` > 0)
/// and evenly spaced boundary/initial traces. Reproducible from `seed`.
CollocationSet sample_collocation(const BenchmarkSpec& spec, std::uint64_t seed, std::size_t interior = 0,
                                  TraceCounts traces = {});

/// Interior points reordered so that batch b owns terms [b*m, (b+1)*m).
Eigen::MatrixXd batch_ordered(const CollocationSet& set);

/// Loss description for the case: residual terms in batch order plus the
/// boundary and initial groups. Throws InvalidPartition for uneven batches.
ad::LossSpec assemble_loss(const BenchmarkSpec& spec, const CollocationSet& set, std::size_t batches);

}  // namespace pinnlab::pde
