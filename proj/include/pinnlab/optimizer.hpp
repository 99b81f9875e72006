#pragma once

#include <cstdint>
#include <vector>

#include "pinnlab/autodiff/loss.hpp"
#include "pinnlab/network.hpp"

namespace pinnlab::opt {

struct AdamConfig {
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  double lr0{1e-3};
  double decay_rate{0.9};
  double decay_interval{5000.0};
};

/// Adam moments. `t` counts completed steps.
struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t{0};

  static AdamState zeros(std::size_t params, AdamConfig config = {});
};

/// lr0 * decay_rate^(t / decay_interval), continuous exponent.
double learning_rate(const AdamConfig& config, double t);

/// Bias-corrected step direction m_hat / (sqrt(v_hat) + eps) for the current
/// moments. All zeros before the first step.
std::vector<double> correction(const AdamState& state);

/// One Adam update: moments first, then theta -= lr(t) * C with t the number of
/// steps taken before this one. Returns the learning rate used. Throws
/// DivergedTraining (carrying the parameter index) on a non-finite gradient.
double adam_step(AdamState& state, const ad::ParamGradient& grad, nn::NetworkState& net);

/// ||m_hat|| / ||sqrt(v_hat)||, 0 when both vanish.
double srr_c(const AdamState& state);

}  // namespace pinnlab::opt
