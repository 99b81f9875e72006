#include "pinnlab/ib.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pinnlab/errors.hpp"

namespace pinnlab::ib {

BinnedRepresentation relative_bins(const nn::ActivationSnapshot& snap, int bins) {
  if (bins < 1 || bins > 255) throw InvalidArgument("bin count must lie in [1, 255]");
  BinnedRepresentation rep;
  rep.bins = bins;
  for (const auto& A : snap.layers) {
    if (A.rows() < 2) throw InvalidArgument("relative binning needs at least two probes");
    const Eigen::RowVectorXd hi = A.colwise().maxCoeff();
    const Eigen::RowVectorXd lo = A.colwise().minCoeff();
    const double range = (hi - lo).mean();
    const double center = (0.5 * (hi + lo)).mean();
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> idx(A.rows(), A.cols());
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    const double start = center - 0.5 * range;
    const double width = range / bins;
    for (int k = 0; k <= bins; ++k) edges[static_cast<std::size_t>(k)] = start + k * width;
    const bool degenerate = !(range > 0.0);
    if (degenerate) {
      idx.setZero();
    } else {
      for (Eigen::Index j = 0; j < A.cols(); ++j) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
          const double b = std::floor((A(i, j) - start) / width);
          idx(i, j) = static_cast<std::uint8_t>(std::clamp(b, 0.0, static_cast<double>(bins - 1)));
        }
      }
    }
    rep.layers.push_back(std::move(idx));
    rep.edges.push_back(std::move(edges));
    rep.degenerate.push_back(degenerate);
  }
  return rep;
}

double entropy_bits(const BinnedRepresentation& rep, std::size_t layer) {
  const auto& M = rep.layers.at(layer);
  std::map<std::vector<std::uint8_t>, std::size_t> counts;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(M.cols()));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) row[static_cast<std::size_t>(j)] = M(i, j);
    ++counts[row];
  }
  const double n = static_cast<double>(M.rows());
  double h = 0.0;
  for (const auto& [key, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

double binary_fraction(const nn::ActivationSnapshot& snap, std::size_t layer, double delta) {
  const auto& A = snap.layers.at(layer);
  if (A.size() == 0) return 0.0;
  return static_cast<double>((A.array().abs() > 1.0 - delta).count()) / static_cast<double>(A.size());
}

IbRecord ib_record(const nn::NetworkState& net, const Eigen::MatrixXd& probes, std::size_t iteration, int bins,
                   double delta) {
  const auto snap = nn::forward_record(net, probes, iteration);
  const auto rep = relative_bins(snap, bins);
  const auto norms = nn::layer_param_norm(net);
  IbRecord r;
  r.iteration = iteration;
  for (std::size_t l = 0; l < snap.layers.size(); ++l) {
    r.entropy.push_back(entropy_bits(rep, l));
    r.binary_fraction.push_back(binary_fraction(snap, l, delta));
    r.param_norm.push_back(norms[l]);
  }
  return r;
}

Eigen::MatrixXd probe_grid(double lo0, double hi0, double lo1, double hi1, int side) {
  if (side < 2) throw InvalidArgument("probe grid needs at least two points per side");
  Eigen::MatrixXd p(2, side * side);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      p(0, i * side + j) = lo0 + (hi0 - lo0) * i / (side - 1);
      p(1, i * side + j) = lo1 + (hi1 - lo1) * j / (side - 1);
    }
  }
  return p;
}

}  // namespace pinnlab::ib
