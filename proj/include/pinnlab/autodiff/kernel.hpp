#pragma once

#include <Eigen/Core>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "pinnlab/autodiff/loss.hpp"
#include "pinnlab/network.hpp"

namespace pinnlab::ad {

struct KernelOptions {
  /// Maximum points per block; residual blocks never straddle a batch.
  std::size_t block_size{256};
  /// OpenMP threads; 0 keeps the runtime default.
  int threads{0};
};

/// Blocked forward-over-reverse evaluation of a LossSpec. Input derivatives are
/// propagated as stencil jets through every layer (one GEMM per layer for all
/// components of a block); parameter gradients come from the adjoint of that
/// jet arithmetic, with the per-point residual expressions differentiated on a
/// thread-local tape. Blocks run in parallel and every reduction happens in a
/// fixed block order, so results do not depend on the thread count.
class LossEvaluator {
 public:
  struct Result {
    LossBreakdown loss;
    ParamGradient grad;
    std::vector<ParamGradient> batch_grads;  // empty unless requested
  };

  explicit LossEvaluator(LossSpec spec, KernelOptions options = {});
  ~LossEvaluator();
  LossEvaluator(LossEvaluator&&) noexcept;
  LossEvaluator& operator=(LossEvaluator&&) noexcept;

  const LossSpec& spec() const noexcept;

  /// Forward pass at `net`. Throws DivergedTraining on the first non-finite
  /// residual. The returned reference stays valid until the next call.
  const ResidualValues& forward(const nn::NetworkState& net);

  /// Loss for the cached forward pass. `lambda` multiplies each residual term.
  LossBreakdown loss(std::span<const double> lambda) const;

  /// Loss and exact gradient for the cached forward pass, with lambda treated
  /// as a constant. Batch gradients carry the constraint terms in full.
  Result backward(std::span<const double> lambda, bool with_batches);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::pair<LossBreakdown, ParamGradient> loss_and_param_grad(const nn::NetworkState& net,
                                                            const LossSpec& spec,
                                                            std::span<const double> lambda,
                                                            KernelOptions options = {});

std::vector<ParamGradient> per_batch_grads(const nn::NetworkState& net, const LossSpec& spec,
                                           std::span<const double> lambda, KernelOptions options = {});

/// Network outputs (outputs x n) at the columns of `points`.
Eigen::MatrixXd forward_values(const nn::NetworkState& net, const Eigen::MatrixXd& points,
                               KernelOptions options = {});

/// Output jets of one channel at every column of `points`, restricted to the
/// stencil components (others are zero).
std::vector<Jet> forward_stencil(const nn::NetworkState& net, const Eigen::MatrixXd& points,
                                 const Stencil& stencil, int channel = 0, KernelOptions options = {});

}  // namespace pinnlab::ad
