#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pinnlab::nn {

/// Flat-index range of one affine layer: weights (out x in, column-major)
/// followed by biases.
struct LayerSlice {
  std::size_t begin{0};
  std::size_t bias_begin{0};
  std::size_t end{0};
  int rows{0};  // output width
  int cols{0};  // input width

  friend bool operator==(const LayerSlice&, const LayerSlice&) = default;
};

/// Fully-connected network with tanh on hidden layers and a linear output.
/// All parameters live in one flat vector; per-layer views map into it.
class NetworkState {
 public:
  NetworkState() = default;
  /// Zero-initialised network. Throws InvalidArgument for fewer than three
  /// sizes or non-positive widths.
  explicit NetworkState(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  std::size_t num_layers() const noexcept { return slices_.size(); }
  std::size_t num_hidden() const noexcept { return slices_.size() - 1; }
  int input_dim() const noexcept { return sizes_.front(); }
  int output_dim() const noexcept { return sizes_.back(); }
  std::size_t num_params() const noexcept { return params_.size(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  const LayerSlice& slice(std::size_t layer) const { return slices_.at(layer); }

  Eigen::Map<const Eigen::MatrixXd> weights(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> weights(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> biases(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> biases(std::size_t layer);

  friend bool operator==(const NetworkState&, const NetworkState&) = default;

 private:
  std::vector<int> sizes_;
  std::vector<LayerSlice> slices_;
  std::vector<double, Eigen::aligned_allocator<double>> params_;
};

/// Glorot-uniform weights, zero biases, reproducible from `seed`.
NetworkState init(std::vector<int> layer_sizes, std::uint64_t seed);

std::vector<double> flatten(const NetworkState& net);
NetworkState unflatten(std::vector<int> layer_sizes, std::span<const double> flat);

/// Post-tanh values of every hidden layer: rows are probe inputs, columns are
/// neurons.
struct ActivationSnapshot {
  std::vector<Eigen::MatrixXd> layers;
  std::size_t iteration{0};
};

/// `probes` holds one input point per column (input_dim x n).
ActivationSnapshot forward_record(const NetworkState& net, const Eigen::MatrixXd& probes,
                                  std::size_t iteration = 0);

/// Euclidean norm of each layer's weights and biases.
std::vector<double> layer_param_norm(const NetworkState& net);

struct Checkpoint {
  NetworkState net;
  std::uint64_t seed{0};
  std::uint64_t iteration{0};
};

/// Header line `layers=<sizes>;seed=<u64>;iter=<u64>` followed by the flat
/// parameter vector as little-endian float64.
void save_checkpoint(const std::filesystem::path& path, const NetworkState& net,
                     std::uint64_t seed, std::uint64_t iteration);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pinnlab::nn
