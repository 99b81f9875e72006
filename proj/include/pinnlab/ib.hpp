#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "pinnlab/network.hpp"

namespace pinnlab::ib {

/// Activations discretised per layer on a window of the layer's mean neuron
/// range, centred on the mean neuron midpoint.
struct BinnedRepresentation {
  std::vector<Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>> layers;
  std::vector<std::vector<double>> edges;  // bins + 1 edges per layer
  std::vector<bool> degenerate;            // zero range: every entry is bin 0
  int bins{30};
};

/// Throws InvalidArgument for fewer than two probes or bins outside [1, 255].
BinnedRepresentation relative_bins(const nn::ActivationSnapshot& snap, int bins = 30);

/// Entropy in bits of the distinct binned rows of one layer.
double entropy_bits(const BinnedRepresentation& rep, std::size_t layer);

/// Fraction of activations with |a| > 1 - delta.
double binary_fraction(const nn::ActivationSnapshot& snap, std::size_t layer, double delta = 0.01);

struct IbRecord {
  std::size_t iteration{0};
  std::vector<double> entropy;
  std::vector<double> binary_fraction;
  std::vector<double> param_norm;
};

IbRecord ib_record(const nn::NetworkState& net, const Eigen::MatrixXd& probes, std::size_t iteration,
                   int bins = 30, double delta = 0.01);

/// `side` x `side` uniform tensor grid (endpoints included) over a 2-D box,
/// one point per column.
Eigen::MatrixXd probe_grid(double lo0, double hi0, double lo1, double hi1, int side);

}  // namespace pinnlab::ib
