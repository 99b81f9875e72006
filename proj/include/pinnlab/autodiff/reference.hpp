#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pinnlab/autodiff/jet.hpp"
#include "pinnlab/autodiff/loss.hpp"
#include "pinnlab/network.hpp"

namespace pinnlab::ad {

/// Push input jets through the network one point at a time. `param(i)` yields
/// flat parameter i as an S (a double, or a tape variable).
template <class S, class ParamAt>
OutputJets<S> propagate(const nn::NetworkState& net, ParamAt&& param, std::span<const double> x, int order) {
  const int d = net.input_dim();
  std::vector<JetT<S>> act;
  act.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) act.push_back(JetT<S>::variable(S(x[static_cast<std::size_t>(i)]), i, d, order));
  const std::size_t L = net.num_layers();
  for (std::size_t l = 0; l < L; ++l) {
    const auto& sl = net.slice(l);
    std::vector<JetT<S>> next;
    next.reserve(static_cast<std::size_t>(sl.rows));
    for (int r = 0; r < sl.rows; ++r) {
      JetT<S> z = JetT<S>::constant(param(sl.bias_begin + static_cast<std::size_t>(r)), d, order);
      for (int c = 0; c < sl.cols; ++c) {
        const std::size_t w = sl.begin + static_cast<std::size_t>(c) * static_cast<std::size_t>(sl.rows) +
                              static_cast<std::size_t>(r);
        axpy(z, param(w), act[static_cast<std::size_t>(c)]);
      }
      next.push_back(l + 1 < L ? tanh(z) : z);
    }
    act = std::move(next);
  }
  return act;
}

/// Output jets of every channel at `x`. Throws InvalidArgument for an order
/// outside {0..3} and ShapeError when x does not match the input width.
OutputJets<double> forward_jets(const nn::NetworkState& net, std::span<const double> x, int order);
Jet forward_jet(const nn::NetworkState& net, std::span<const double> x, int order, int channel = 0);

/// Serial point-by-point evaluation with the parameters on a scalar tape. Slow;
/// kept as the independent reference for the blocked kernel.
namespace reference {

std::pair<LossBreakdown, ParamGradient> loss_and_param_grad(const nn::NetworkState& net, const LossSpec& spec,
                                                            std::span<const double> lambda);

std::vector<ParamGradient> per_batch_grads(const nn::NetworkState& net, const LossSpec& spec,
                                           std::span<const double> lambda);

ResidualValues residuals(const nn::NetworkState& net, const LossSpec& spec);

}  // namespace reference
}  // namespace pinnlab::ad
