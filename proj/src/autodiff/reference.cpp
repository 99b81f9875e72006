#include "pinnlab/autodiff/reference.hpp"

#include <cmath>
#include <string>

#include "pinnlab/errors.hpp"

namespace pinnlab::ad {

OutputJets<double> forward_jets(const nn::NetworkState& net, std::span<const double> x, int order) {
  if (order < 0 || order > kMaxOrder) throw InvalidArgument("jet order must be in {0,1,2,3}");
  if (static_cast<int>(x.size()) != net.input_dim()) {
    throw ShapeError("point has " + std::to_string(x.size()) + " coordinates, network expects " +
                     std::to_string(net.input_dim()));
  }
  const auto p = net.params();
  return propagate<double>(net, [&](std::size_t i) { return p[i]; }, x, order);
}

Jet forward_jet(const nn::NetworkState& net, std::span<const double> x, int order, int channel) {
  if (channel < 0 || channel >= net.output_dim()) throw ShapeError("output channel out of range");
  return forward_jets(net, x, order)[static_cast<std::size_t>(channel)];
}

namespace reference {
namespace {

struct TermResult {
  std::vector<double> values;  // width entries
  std::vector<double> grad;    // d(sum_c R_c^2)/dtheta
};

void eval_term(const nn::NetworkState& net, const PointGroup& g, std::size_t k, Tape& tape, bool with_grad,
               TermResult& out) {
  const int dim = static_cast<int>(g.points.rows());
  const std::size_t p = net.num_params();
  tape.clear();
  std::vector<Var> params;
  if (with_grad) {
    params.reserve(p);
    for (double v : net.params()) params.push_back(tape.input(v));
  } else {
    for (double v : net.params()) params.emplace_back(v);
  }
  std::vector<OutputJets<Var>> jets;
  std::vector<double> coords(static_cast<std::size_t>(g.arity * dim));
  for (int a = 0; a < g.arity; ++a) {
    const Eigen::Index col = static_cast<Eigen::Index>(k) * g.arity + a;
    for (int i = 0; i < dim; ++i) coords[static_cast<std::size_t>(a * dim + i)] = g.points(i, col);
    jets.push_back(propagate<Var>(net, [&](std::size_t i) { return params[i]; },
                                  std::span<const double>(coords.data() + a * dim, static_cast<std::size_t>(dim)),
                                  g.stencil.max_order()));
  }
  std::vector<Var> r(static_cast<std::size_t>(g.width));
  g.eval_var(TermInput<Var>{jets, coords, dim}, r);
  out.values.resize(r.size());
  for (std::size_t c = 0; c < r.size(); ++c) {
    out.values[c] = r[c].value();
    if (!std::isfinite(out.values[c])) {
      throw DivergedTraining("non-finite residual in group '" + g.name + "' at point " + std::to_string(k), k);
    }
  }
  out.grad.assign(p, 0.0);
  if (!with_grad) return;
  std::vector<std::pair<Var, double>> seeds;
  for (std::size_t c = 0; c < r.size(); ++c) {
    if (!r[c].is_constant()) seeds.emplace_back(r[c], 2.0 * r[c].value());
  }
  if (seeds.empty()) return;
  const auto adj = tape.adjoints(seeds);
  for (std::size_t i = 0; i < p; ++i) out.grad[i] = adj[params[i].index()];
}

struct Sums {
  LossBreakdown loss;
  std::vector<std::vector<double>> batch;  // unscaled sum of lambda^2 * term grads
  std::vector<double> constraint;          // already divided by group sizes
};

Sums accumulate(const nn::NetworkState& net, const LossSpec& spec, std::span<const double> lambda) {
  spec.validate();
  if (lambda.size() != spec.num_residual_terms()) {
    throw InvalidArgument("weights length must equal the number of residual points");
  }
  const std::size_t p = net.num_params();
  const std::size_t m = spec.batch_size();
  Sums s;
  s.batch.assign(spec.batches, std::vector<double>(p, 0.0));
  s.constraint.assign(p, 0.0);
  Tape tape;
  TermResult t;
  ResidualValues rv;
  rv.width = spec.residual.width;
  for (std::size_t k = 0; k < spec.num_residual_terms(); ++k) {
    eval_term(net, spec.residual, k, tape, true, t);
    rv.components.insert(rv.components.end(), t.values.begin(), t.values.end());
    const double l2 = lambda[k] * lambda[k];
    auto& dst = s.batch[k / m];
    for (std::size_t i = 0; i < p; ++i) dst[i] += l2 * t.grad[i];
  }
  std::vector<std::vector<double>> cvals(spec.constraints.size());
  for (std::size_t g = 0; g < spec.constraints.size(); ++g) {
    const auto& grp = spec.constraints[g];
    std::vector<double> sum(p, 0.0);
    for (std::size_t k = 0; k < grp.num_terms(); ++k) {
      eval_term(net, grp, k, tape, true, t);
      cvals[g].insert(cvals[g].end(), t.values.begin(), t.values.end());
      for (std::size_t i = 0; i < p; ++i) sum[i] += t.grad[i];
    }
    const double ng = static_cast<double>(grp.num_terms());
    for (std::size_t i = 0; i < p; ++i) s.constraint[i] += sum[i] / ng;
  }
  s.loss = combine_loss(spec, rv, cvals, lambda);
  return s;
}

}  // namespace

std::pair<LossBreakdown, ParamGradient> loss_and_param_grad(const nn::NetworkState& net, const LossSpec& spec,
                                                            std::span<const double> lambda) {
  Sums s = accumulate(net, spec, lambda);
  const std::size_t p = net.num_params();
  ParamGradient g;
  g.values.assign(p, 0.0);
  for (const auto& b : s.batch)
    for (std::size_t i = 0; i < p; ++i) g[i] += b[i];
  const double n = static_cast<double>(spec.num_residual_terms());
  for (std::size_t i = 0; i < p; ++i) g[i] = g[i] / n + s.constraint[i];
  return {s.loss, std::move(g)};
}

std::vector<ParamGradient> per_batch_grads(const nn::NetworkState& net, const LossSpec& spec,
                                           std::span<const double> lambda) {
  Sums s = accumulate(net, spec, lambda);
  const std::size_t p = net.num_params();
  const double m = static_cast<double>(spec.batch_size());
  std::vector<ParamGradient> out(spec.batches);
  for (std::size_t b = 0; b < spec.batches; ++b) {
    out[b].values.resize(p);
    for (std::size_t i = 0; i < p; ++i) out[b][i] = s.batch[b][i] / m + s.constraint[i];
  }
  return out;
}

ResidualValues residuals(const nn::NetworkState& net, const LossSpec& spec) {
  spec.validate();
  Tape tape;
  TermResult t;
  ResidualValues rv;
  rv.width = spec.residual.width;
  for (std::size_t k = 0; k < spec.num_residual_terms(); ++k) {
    eval_term(net, spec.residual, k, tape, false, t);
    rv.components.insert(rv.components.end(), t.values.begin(), t.values.end());
    rv.magnitude.push_back(residual_magnitude(t.values));
  }
  return rv;
}

}  // namespace reference
}  // namespace pinnlab::ad
