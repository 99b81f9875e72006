#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pinnlab/autodiff/jet.hpp"
#include "pinnlab/autodiff/stencil.hpp"
#include "pinnlab/autodiff/tape.hpp"

namespace pinnlab::ad {

/// Jets of every network output channel at one point.
template <class S>
using OutputJets = std::vector<JetT<S>>;

/// What a loss term sees: the output jets at each of its `arity` points and the
/// point coordinates (point-major, `dim` values per point).
template <class S>
struct TermInput {
  std::span<const OutputJets<S>> jets;
  std::span<const double> coords;
  int dim{0};

  const JetT<S>& jet(int point, int channel = 0) const {
    return jets[static_cast<std::size_t>(point)][static_cast<std::size_t>(channel)];
  }
  const double* point(int a) const { return coords.data() + static_cast<std::ptrdiff_t>(a) * dim; }
};

template <class S>
using TermFn = std::function<void(const TermInput<S>&, std::span<S>)>;

enum class TermRole { Residual, Boundary, Initial };

/// A set of loss terms of the same kind. Term k is built from the points in
/// columns [k*arity, (k+1)*arity) and produces `width` residual components.
struct PointGroup {
  std::string name;
  TermRole role{TermRole::Residual};
  Eigen::MatrixXd points;  // input_dim x (terms * arity)
  int arity{1};
  int width{1};
  Stencil stencil;
  TermFn<double> eval_real;
  TermFn<Var> eval_var;

  std::size_t num_terms() const { return static_cast<std::size_t>(points.cols() / arity); }
};

/// Build a group from one generic callable `fn(const TermInput<S>&, std::span<S>)`.
template <class F>
PointGroup make_group(std::string name, TermRole role, Eigen::MatrixXd points, int arity, int width,
                      Stencil stencil, F fn) {
  PointGroup g;
  g.name = std::move(name);
  g.role = role;
  g.points = std::move(points);
  g.arity = arity;
  g.width = width;
  g.stencil = std::move(stencil);
  g.eval_real = fn;
  g.eval_var = fn;
  return g;
}

/// Weighted residual loss:
///   L = (1/n) sum_k lambda_k^2 sum_c R_{k,c}^2 + sum_groups (1/n_g) sum_k sum_c e_{k,c}^2.
/// Residual terms are stored in batch order: batch b owns terms [b*m, (b+1)*m).
struct LossSpec {
  int input_dim{2};
  int outputs{1};
  PointGroup residual;
  std::vector<PointGroup> constraints;
  std::size_t batches{1};

  std::size_t num_residual_terms() const { return residual.num_terms(); }
  /// Throws InvalidPartition unless the residual terms split evenly.
  std::size_t batch_size() const;
  void validate() const;
};

struct LossBreakdown {
  double total{0.0};
  double residual{0.0};
  double boundary{0.0};
  double initial{0.0};
};

/// Flat gradient aligned with NetworkState::params().
struct ParamGradient {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Residual values of the residual group: `components` is terms x width
/// (row-major), `magnitude` the per-term Euclidean norm over components.
struct ResidualValues {
  int width{1};
  std::vector<double> components;
  std::vector<double> magnitude;
};

/// |R| of one term: absolute value for scalar residuals, Euclidean norm otherwise.
inline double residual_magnitude(std::span<const double> comps) {
  if (comps.size() == 1) return comps[0] < 0.0 ? -comps[0] : comps[0];
  double sq = 0.0;
  for (double r : comps) sq += r * r;
  return std::sqrt(sq);
}

/// Loss breakdown for a residual/constraint evaluation. Shared by both
/// differentiation routes so the loss formula lives in one place.
LossBreakdown combine_loss(const LossSpec& spec, const ResidualValues& residual,
                           const std::vector<std::vector<double>>& constraint_values,
                           std::span<const double> lambda);

/// Any field given by its output jets at a point (e.g. an analytic solution).
using FieldFn = std::function<OutputJets<double>(std::span<const double> x, int order)>;

/// Evaluate the loss of an arbitrary field with the same term definitions used
/// for training.
LossBreakdown evaluate_field_loss(const LossSpec& spec, const FieldFn& field,
                                  std::span<const double> lambda, ResidualValues* residuals = nullptr);

}  // namespace pinnlab::ad
