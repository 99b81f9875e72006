#include "pinnlab/pde.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "pinnlab/errors.hpp"

namespace pinnlab::pde {

using ad::JetT;
using ad::make_group;
using ad::Stencil;
using ad::TermRole;

CaseId parse_case(std::string_view name) {
  if (name == "allen-cahn") return CaseId::AllenCahn;
  if (name == "helmholtz") return CaseId::Helmholtz;
  if (name == "burgers") return CaseId::Burgers;
  if (name == "cavity") return CaseId::Cavity;
  throw UnknownCase("unknown case '" + std::string(name) + "' (expected allen-cahn, helmholtz, burgers or cavity)");
}

std::string_view case_name(CaseId id) {
  switch (id) {
    case CaseId::AllenCahn: return "allen-cahn";
    case CaseId::Helmholtz: return "helmholtz";
    case CaseId::Burgers: return "burgers";
    case CaseId::Cavity: return "cavity";
  }
  return "?";
}

BenchmarkSpec benchmark(CaseId id) {
  BenchmarkSpec s;
  s.id = id;
  switch (id) {
    case CaseId::AllenCahn:
      s.domain = {Interval{0.0, 1.0}, Interval{-1.0, 1.0}};
      s.axis_names = {"t", "x"};
      s.has_initial = true;
      break;
    case CaseId::Helmholtz:
      s.domain = {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}};
      s.axis_names = {"x", "y"};
      break;
    case CaseId::Burgers:
      s.domain = {Interval{0.0, 1.0}, Interval{-1.0, 1.0}};
      s.axis_names = {"t", "x"};
      s.collocation = 10000;
      s.iterations = 100000;
      s.has_initial = true;
      break;
    case CaseId::Cavity:
      s.domain = {Interval{0.0, 1.0}, Interval{0.0, 1.0}};
      s.axis_names = {"x", "y"};
      s.outputs = 2;
      s.jet_order = 3;
      break;
  }
  return s;
}

namespace {

// Midpoints of n equal cells of [lo, hi].
double trace(const Interval& iv, std::size_t i, std::size_t n) {
  return iv.lo + iv.width() * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
}

Eigen::MatrixXd latin_hypercube(const BenchmarkSpec& spec, std::size_t n, std::mt19937_64& rng) {
  Eigen::MatrixXd pts(spec.input_dim, static_cast<Eigen::Index>(n));
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::vector<std::size_t> strata(n);
  for (int a = 0; a < spec.input_dim; ++a) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    std::shuffle(strata.begin(), strata.end(), rng);
    const Interval& iv = spec.domain[static_cast<std::size_t>(a)];
    for (std::size_t j = 0; j < n; ++j) {
      const double u = (static_cast<double>(strata[j]) + jitter(rng)) / static_cast<double>(n);
      pts(a, static_cast<Eigen::Index>(j)) = iv.lo + iv.width() * u;
    }
  }
  return pts;
}

// Four walls of a rectangle, `per` points each: bottom, top, left, right.
Eigen::MatrixXd walls(const BenchmarkSpec& spec, std::size_t per) {
  const Interval& X = spec.domain[0];
  const Interval& Y = spec.domain[1];
  Eigen::MatrixXd b(2, static_cast<Eigen::Index>(4 * per));
  for (std::size_t i = 0; i < per; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    const auto n = static_cast<Eigen::Index>(per);
    b.col(c) << trace(X, i, per), Y.lo;
    b.col(n + c) << trace(X, i, per), Y.hi;
    b.col(2 * n + c) << X.lo, trace(Y, i, per);
    b.col(3 * n + c) << X.hi, trace(Y, i, per);
  }
  return b;
}

}  // namespace

CollocationSet sample_collocation(const BenchmarkSpec& spec, std::uint64_t seed, std::size_t interior,
                                  TraceCounts traces) {
  CollocationSet set;
  std::mt19937_64 rng(seed);
  const std::size_t n = interior > 0 ? interior : spec.collocation;
  set.interior = latin_hypercube(spec, n, rng);
  set.permutation.resize(n);
  std::iota(set.permutation.begin(), set.permutation.end(), std::size_t{0});
  std::shuffle(set.permutation.begin(), set.permutation.end(), rng);

  const std::size_t per = traces.per_segment;
  const Interval& T = spec.domain[0];
  const Interval& X = spec.domain[1];
  switch (spec.id) {
    case CaseId::AllenCahn:
      set.boundary.resize(2, static_cast<Eigen::Index>(2 * per));
      for (std::size_t i = 0; i < per; ++i) {
        const double t = trace(T, i, per);
        set.boundary.col(static_cast<Eigen::Index>(2 * i)) << t, X.lo;
        set.boundary.col(static_cast<Eigen::Index>(2 * i + 1)) << t, X.hi;
      }
      break;
    case CaseId::Burgers:
      set.boundary.resize(2, static_cast<Eigen::Index>(2 * per));
      for (std::size_t i = 0; i < per; ++i) {
        const double t = trace(T, i, per);
        set.boundary.col(static_cast<Eigen::Index>(i)) << t, X.lo;
        set.boundary.col(static_cast<Eigen::Index>(per + i)) << t, X.hi;
      }
      break;
    case CaseId::Helmholtz:
    case CaseId::Cavity:
      set.boundary = walls(spec, per);
      break;
  }
  if (spec.has_initial) {
    set.initial.resize(2, static_cast<Eigen::Index>(traces.initial));
    for (std::size_t i = 0; i < traces.initial; ++i) {
      set.initial.col(static_cast<Eigen::Index>(i)) << T.lo, trace(X, i, traces.initial);
    }
  }
  return set;
}

Eigen::MatrixXd batch_ordered(const CollocationSet& set) {
  Eigen::MatrixXd out(set.interior.rows(), set.interior.cols());
  for (std::size_t k = 0; k < set.permutation.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = set.interior.col(static_cast<Eigen::Index>(set.permutation[k]));
  }
  return out;
}

ad::LossSpec assemble_loss(const BenchmarkSpec& spec, const CollocationSet& set, std::size_t batches) {
  ad::LossSpec ls;
  ls.input_dim = spec.input_dim;
  ls.outputs = spec.outputs;
  ls.batches = batches;
  Eigen::MatrixXd pts = batch_ordered(set);
  const int d = spec.input_dim;

  switch (spec.id) {
    case CaseId::AllenCahn: {
      const double eps = spec.epsilon;
      ls.residual = make_group("residual", TermRole::Residual, std::move(pts), 1, 1, Stencil(d, {{0}, {1, 1}}),
                               [eps](const auto& in, auto out) { out[0] = allen_cahn_residual(in.jet(0), eps); });
      ls.constraints.push_back(make_group("periodic", TermRole::Boundary, set.boundary, 2, 2, Stencil(d, {{1}}),
                                          [](const auto& in, auto out) {
                                            out[0] = in.jet(0).value() - in.jet(1).value();
                                            out[1] = in.jet(0).d(1) - in.jet(1).d(1);
                                          }));
      ls.constraints.push_back(make_group("initial", TermRole::Initial, set.initial, 1, 1, Stencil(d, {}),
                                          [](const auto& in, auto out) {
                                            const double x = in.point(0)[1];
                                            out[0] = in.jet(0).value() - x * x * std::cos(std::numbers::pi * x);
                                          }));
      break;
    }
    case CaseId::Helmholtz: {
      const double a1 = spec.a1, a2 = spec.a2, k = spec.k;
      ls.residual = make_group("residual", TermRole::Residual, std::move(pts), 1, 1, Stencil(d, {{0, 0}, {1, 1}}),
                               [a1, a2, k](const auto& in, auto out) {
                                 const double* p = in.point(0);
                                 out[0] = helmholtz_residual(in.jet(0), p[0], p[1], a1, a2, k);
                               });
      ls.constraints.push_back(make_group("boundary", TermRole::Boundary, set.boundary, 1, 1, Stencil(d, {}),
                                          [](const auto& in, auto out) { out[0] = in.jet(0).value(); }));
      break;
    }
    case CaseId::Burgers: {
      const double nu = spec.nu;
      ls.residual = make_group("residual", TermRole::Residual, std::move(pts), 1, 1, Stencil(d, {{0}, {1, 1}}),
                               [nu](const auto& in, auto out) { out[0] = burgers_residual(in.jet(0), nu); });
      ls.constraints.push_back(make_group("boundary", TermRole::Boundary, set.boundary, 1, 1, Stencil(d, {}),
                                          [](const auto& in, auto out) { out[0] = in.jet(0).value(); }));
      ls.constraints.push_back(make_group("initial", TermRole::Initial, set.initial, 1, 1, Stencil(d, {}),
                                          [](const auto& in, auto out) {
                                            const double x = in.point(0)[1];
                                            out[0] = in.jet(0).value() + std::sin(std::numbers::pi * x);
                                          }));
      break;
    }
    case CaseId::Cavity: {
      const double re = spec.reynolds, r = spec.lid_sharpness, top = spec.domain[1].hi;
      ls.residual = make_group("residual", TermRole::Residual, std::move(pts), 1, 2, Stencil::full(d, 3),
                               [re](const auto& in, auto out) {
                                 const auto rr = cavity_residuals(in.jet(0, 0), in.jet(0, 1), re);
                                 out[0] = rr[0];
                                 out[1] = rr[1];
                               });
      ls.constraints.push_back(make_group("boundary", TermRole::Boundary, set.boundary, 1, 2, Stencil::full(d, 1),
                                          [r, top](const auto& in, auto out) {
                                            const double* p = in.point(0);
                                            const auto vel = cavity_velocity(in.jet(0, 0));
                                            const double lid = p[1] == top ? lid_velocity(p[0], r) : 0.0;
                                            out[0] = vel[0] - lid;
                                            out[1] = vel[1];
                                          }));
      break;
    }
  }
  ls.validate();
  return ls;
}

}  // namespace pinnlab::pde
