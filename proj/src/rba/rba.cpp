#include "pinnlab/rba.hpp"

#include <algorithm>
#include <cmath>

#include "pinnlab/errors.hpp"

namespace pinnlab::rba {

RbaWeights RbaWeights::make(std::size_t points, bool enabled, double gamma, double eta, double initial) {
  RbaWeights w;
  w.enabled = enabled;
  w.gamma = gamma;
  w.eta = eta;
  w.lambda.assign(points, enabled ? initial : 1.0);
  return w;
}

namespace {

double max_abs(std::span<const double> r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

void check_size(const RbaWeights& w, std::span<const double> r) {
  if (r.size() != w.lambda.size()) throw ShapeError("residual count does not match the number of weights");
}

}  // namespace

void rba_update(RbaWeights& w, std::span<const double> magnitudes) {
  check_size(w, magnitudes);
  if (!w.enabled) return;
  const double inf_norm = max_abs(magnitudes);
  if (inf_norm == 0.0) return;
  for (std::size_t i = 0; i < w.lambda.size(); ++i) {
    w.lambda[i] = w.gamma * w.lambda[i] + w.eta * (std::abs(magnitudes[i]) / inf_norm);
  }
}

std::vector<double> steady_state_check(const RbaWeights& w, std::span<const double> magnitudes) {
  check_size(w, magnitudes);
  const double inf_norm = max_abs(magnitudes);
  std::vector<double> dev(w.lambda.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const double target = inf_norm == 0.0 ? 0.0 : std::abs(magnitudes[i]) / inf_norm;
    dev[i] = std::abs(w.lambda[i] - target);
  }
  return dev;
}

LambdaStats lambda_stats(std::span<const double> lambda) {
  if (lambda.empty()) return {};
  LambdaStats s{0.0, lambda[0], lambda[0]};
  for (double v : lambda) {
    s.mean += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean /= static_cast<double>(lambda.size());
  return s;
}

}  // namespace pinnlab::rba
