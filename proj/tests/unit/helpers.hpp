#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "pinnlab/network.hpp"

namespace testutil {

inline Eigen::MatrixXd random_points(int dim, int n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd p(dim, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < dim; ++i) p(i, j) = u(rng);
  return p;
}

/// Random biases too, so no derivative vanishes by symmetry.
inline pinnlab::nn::NetworkState random_net(std::vector<int> sizes, std::uint64_t seed) {
  auto net = pinnlab::nn::init(std::move(sizes), seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto b = net.biases(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = u(rng);
  }
  return net;
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// max_i |a_i - b_i| / max(max_i |b_i|, floor)
inline double vec_rel_err(std::span<const double> a, std::span<const double> b, double floor = 1e-12) {
  double num = 0.0, den = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

/// Central differences of a scalar function of the flat parameters.
inline std::vector<double> fd_grad(pinnlab::nn::NetworkState net,
                                   const std::function<double(const pinnlab::nn::NetworkState&)>& f,
                                   double h = 1e-4) {
  std::vector<double> g(net.num_params());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = net.params()[i];
    net.params()[i] = x + h;
    const double fp = f(net);
    net.params()[i] = x - h;
    const double fm = f(net);
    net.params()[i] = x;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace testutil
