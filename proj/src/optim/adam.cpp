#include <cmath>
#include <string>

#include "pinnlab/errors.hpp"
#include "pinnlab/optimizer.hpp"

namespace pinnlab::opt {

AdamState AdamState::zeros(std::size_t params, AdamConfig config) {
  AdamState s;
  s.config = config;
  s.m.assign(params, 0.0);
  s.v.assign(params, 0.0);
  return s;
}

double learning_rate(const AdamConfig& config, double t) {
  return config.lr0 * std::pow(config.decay_rate, t / config.decay_interval);
}

namespace {

struct BiasCorrection {
  double c1{1.0};
  double c2{1.0};
};

BiasCorrection bias(const AdamState& s) {
  if (s.t == 0) return {};
  const double t = static_cast<double>(s.t);
  return {1.0 - std::pow(s.config.beta1, t), 1.0 - std::pow(s.config.beta2, t)};
}

}  // namespace

std::vector<double> correction(const AdamState& state) {
  std::vector<double> c(state.m.size(), 0.0);
  if (state.t == 0) return c;
  const auto b = bias(state);
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = (state.m[i] / b.c1) / (std::sqrt(state.v[i] / b.c2) + state.config.eps);
  }
  return c;
}

double adam_step(AdamState& state, const ad::ParamGradient& grad, nn::NetworkState& net) {
  auto theta = net.params();
  if (grad.size() != theta.size() || state.m.size() != theta.size()) {
    throw ShapeError("gradient, optimizer state and network sizes differ");
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw DivergedTraining("non-finite gradient at parameter " + std::to_string(i), i);
    }
  }
  const double lr = learning_rate(state.config, static_cast<double>(state.t));
  const double b1 = state.config.beta1, b2 = state.config.beta2;
  ++state.t;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
  }
  const auto b = bias(state);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    theta[i] -= lr * ((state.m[i] / b.c1) / (std::sqrt(state.v[i] / b.c2) + state.config.eps));
  }
  return lr;
}

double srr_c(const AdamState& state) {
  if (state.t == 0) return 0.0;
  const auto b = bias(state);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < state.m.size(); ++i) {
    const double mh = state.m[i] / b.c1;
    num += mh * mh;
    den += state.v[i] / b.c2;
  }
  if (num == 0.0 && den == 0.0) return 0.0;
  return std::sqrt(num) / std::sqrt(den);
}

}  // namespace pinnlab::opt
