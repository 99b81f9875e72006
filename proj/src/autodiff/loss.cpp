#include "pinnlab/autodiff/loss.hpp"

#include <cmath>
#include <string>

#include "pinnlab/errors.hpp"

namespace pinnlab::ad {

std::size_t LossSpec::batch_size() const {
  const std::size_t n = num_residual_terms();
  if (batches == 0) throw InvalidPartition("batch count must be positive");
  if (n % batches != 0) {
    throw InvalidPartition(std::to_string(n) + " residual points do not split into " +
                           std::to_string(batches) + " equal batches");
  }
  return n / batches;
}

void LossSpec::validate() const {
  if (residual.arity != 1) throw InvalidArgument("residual terms must have arity 1");
  if (residual.role != TermRole::Residual) throw InvalidArgument("residual group has wrong role");
  auto check = [&](const PointGroup& g) {
    if (g.points.rows() != input_dim) throw ShapeError("group '" + g.name + "' has wrong point dimension");
    if (g.arity < 1 || g.points.cols() % g.arity != 0) {
      throw ShapeError("group '" + g.name + "' point count is not a multiple of its arity");
    }
    if (g.stencil.dim() != input_dim) throw ShapeError("group '" + g.name + "' stencil dimension mismatch");
    if (g.width < 1) throw InvalidArgument("group '" + g.name + "' must have width >= 1");
  };
  check(residual);
  for (const auto& g : constraints) {
    check(g);
    if (g.role == TermRole::Residual) throw InvalidArgument("constraint group '" + g.name + "' has residual role");
  }
  (void)batch_size();
}

LossBreakdown combine_loss(const LossSpec& spec, const ResidualValues& residual,
                           const std::vector<std::vector<double>>& constraint_values,
                           std::span<const double> lambda) {
  LossBreakdown out;
  const std::size_t n = spec.num_residual_terms();
  const auto w = static_cast<std::size_t>(residual.width);
  if (n > 0) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double sq = 0.0;
      for (std::size_t c = 0; c < w; ++c) {
        const double r = residual.components[k * w + c];
        sq += r * r;
      }
      const double l = lambda[k];
      acc += l * l * sq;
    }
    out.residual = acc / static_cast<double>(n);
  }
  for (std::size_t g = 0; g < spec.constraints.size(); ++g) {
    const auto& group = spec.constraints[g];
    const auto& vals = constraint_values[g];
    const std::size_t terms = group.num_terms();
    if (terms == 0) continue;
    double acc = 0.0;
    for (double e : vals) acc += e * e;
    const double term = acc / static_cast<double>(terms);
    if (group.role == TermRole::Initial) {
      out.initial += term;
    } else {
      out.boundary += term;
    }
  }
  out.total = out.residual + out.boundary + out.initial;
  return out;
}

namespace {

void eval_group_field(const PointGroup& g, const FieldFn& field, int dim, std::vector<double>& values) {
  const std::size_t terms = g.num_terms();
  values.assign(terms * static_cast<std::size_t>(g.width), 0.0);
  std::vector<OutputJets<double>> jets(static_cast<std::size_t>(g.arity));
  std::vector<double> coords(static_cast<std::size_t>(g.arity * dim));
  for (std::size_t k = 0; k < terms; ++k) {
    for (int a = 0; a < g.arity; ++a) {
      const Eigen::Index col = static_cast<Eigen::Index>(k) * g.arity + a;
      for (int i = 0; i < dim; ++i) coords[static_cast<std::size_t>(a * dim + i)] = g.points(i, col);
      jets[static_cast<std::size_t>(a)] = field(
          std::span<const double>(coords.data() + a * dim, static_cast<std::size_t>(dim)),
          g.stencil.max_order());
    }
    TermInput<double> in{jets, coords, dim};
    g.eval_real(in, std::span<double>(values.data() + k * static_cast<std::size_t>(g.width),
                                      static_cast<std::size_t>(g.width)));
  }
}

}  // namespace

LossBreakdown evaluate_field_loss(const LossSpec& spec, const FieldFn& field,
                                  std::span<const double> lambda, ResidualValues* residuals) {
  spec.validate();
  if (lambda.size() != spec.num_residual_terms()) {
    throw InvalidArgument("weights length must equal the number of residual points");
  }
  ResidualValues rv;
  rv.width = spec.residual.width;
  eval_group_field(spec.residual, field, spec.input_dim, rv.components);
  const auto w = static_cast<std::size_t>(rv.width);
  rv.magnitude.resize(spec.num_residual_terms());
  for (std::size_t k = 0; k < rv.magnitude.size(); ++k) {
    rv.magnitude[k] = residual_magnitude(std::span<const double>(rv.components.data() + k * w, w));
  }
  std::vector<std::vector<double>> cvals(spec.constraints.size());
  for (std::size_t g = 0; g < spec.constraints.size(); ++g) {
    eval_group_field(spec.constraints[g], field, spec.input_dim, cvals[g]);
  }
  const auto out = combine_loss(spec, rv, cvals, lambda);
  if (residuals) *residuals = std::move(rv);
  return out;
}

}  // namespace pinnlab::ad
