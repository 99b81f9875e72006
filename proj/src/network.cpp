#include "pinnlab/network.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "common/binary_io.hpp"
#include "pinnlab/errors.hpp"

namespace pinnlab::nn {

NetworkState::NetworkState(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 3) throw InvalidArgument("network needs at least input, hidden and output sizes");
  for (int s : sizes_) {
    if (s <= 0) throw InvalidArgument("layer sizes must be positive");
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    LayerSlice s;
    s.rows = sizes_[l + 1];
    s.cols = sizes_[l];
    s.begin = offset;
    s.bias_begin = offset + static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols);
    s.end = s.bias_begin + static_cast<std::size_t>(s.rows);
    offset = s.end;
    slices_.push_back(s);
  }
  params_.assign(offset, 0.0);
}

Eigen::Map<const Eigen::MatrixXd> NetworkState::weights(std::size_t layer) const {
  const auto& s = slices_.at(layer);
  return {params_.data() + s.begin, s.rows, s.cols};
}

Eigen::Map<Eigen::MatrixXd> NetworkState::weights(std::size_t layer) {
  const auto& s = slices_.at(layer);
  return {params_.data() + s.begin, s.rows, s.cols};
}

Eigen::Map<const Eigen::VectorXd> NetworkState::biases(std::size_t layer) const {
  const auto& s = slices_.at(layer);
  return {params_.data() + s.bias_begin, s.rows};
}

Eigen::Map<Eigen::VectorXd> NetworkState::biases(std::size_t layer) {
  const auto& s = slices_.at(layer);
  return {params_.data() + s.bias_begin, s.rows};
}

NetworkState init(std::vector<int> layer_sizes, std::uint64_t seed) {
  NetworkState net(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& s = net.slice(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto p = net.params();
    for (std::size_t i = s.begin; i < s.bias_begin; ++i) p[i] = dist(rng);
  }
  return net;
}

std::vector<double> flatten(const NetworkState& net) {
  return {net.params().begin(), net.params().end()};
}

NetworkState unflatten(std::vector<int> layer_sizes, std::span<const double> flat) {
  NetworkState net(std::move(layer_sizes));
  if (flat.size() != net.num_params()) {
    throw ShapeError("flat parameter vector has " + std::to_string(flat.size()) +
                     " entries, expected " + std::to_string(net.num_params()));
  }
  std::copy(flat.begin(), flat.end(), net.params().begin());
  return net;
}

ActivationSnapshot forward_record(const NetworkState& net, const Eigen::MatrixXd& probes,
                                  std::size_t iteration) {
  if (probes.rows() != net.input_dim()) {
    throw ShapeError("probe dimension does not match network input width");
  }
  ActivationSnapshot snap;
  snap.iteration = iteration;
  const Eigen::Index n = probes.cols();
  // Same accumulation order as the jet propagation (bias first, then inputs in
  // order), so values agree bit for bit with forward_jet.
  Eigen::MatrixXd prev = probes.transpose();
  for (std::size_t l = 0; l < net.num_hidden(); ++l) {
    const auto W = net.weights(l);
    const auto b = net.biases(l);
    Eigen::MatrixXd act(n, W.rows());
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index i = 0; i < W.rows(); ++i) {
        double z = b[i];
        for (Eigen::Index j = 0; j < W.cols(); ++j) z = z + W(i, j) * prev(p, j);
        act(p, i) = std::tanh(z);
      }
    }
    snap.layers.push_back(act);
    prev = std::move(act);
  }
  return snap;
}

std::vector<double> layer_param_norm(const NetworkState& net) {
  std::vector<double> norms;
  norms.reserve(net.num_layers());
  const auto p = net.params();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& s = net.slice(l);
    double sq = 0.0;
    for (std::size_t i = s.begin; i < s.end; ++i) sq += p[i] * p[i];
    norms.push_back(std::sqrt(sq));
  }
  return norms;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkState& net,
                     std::uint64_t seed, std::uint64_t iteration) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  os << "layers=";
  const auto& sizes = net.layer_sizes();
  for (std::size_t i = 0; i < sizes.size(); ++i) os << (i ? "," : "") << sizes[i];
  os << ";seed=" << seed << ";iter=" << iteration << '\n';
  io::write_f64_le(os, net.params());
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string header;
  std::getline(is, header);
  std::vector<int> sizes;
  std::uint64_t seed = 0;
  std::uint64_t iter = 0;
  bool have_layers = false, have_seed = false, have_iter = false;
  std::stringstream fields(header);
  std::string field;
  while (std::getline(fields, field, ';')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("malformed checkpoint header field: " + field, 1);
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    try {
      if (key == "layers") {
        std::stringstream ls(val);
        std::string tok;
        while (std::getline(ls, tok, ',')) sizes.push_back(std::stoi(tok));
        have_layers = true;
      } else if (key == "seed") {
        seed = std::stoull(val);
        have_seed = true;
      } else if (key == "iter") {
        iter = std::stoull(val);
        have_iter = true;
      } else {
        throw ParseError("unknown checkpoint header key: " + key, 1);
      }
    } catch (const std::logic_error&) {
      throw ParseError("bad value in checkpoint header field: " + field, 1);
    }
  }
  if (!have_layers || !have_seed || !have_iter) {
    throw ParseError("checkpoint header must carry layers, seed and iter", 1);
  }
  std::vector<double> flat;
  if (!io::read_f64_le(is, flat)) throw ParseError("checkpoint payload is truncated", 2);
  return {unflatten(std::move(sizes), flat), seed, iter};
}

}  // namespace pinnlab::nn
