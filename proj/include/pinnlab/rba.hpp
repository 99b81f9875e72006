#pragma once

#include <span>
#include <vector>

namespace pinnlab::rba {

/// Per-point residual multipliers. When disabled, lambda is all ones and never
/// changes.
struct RbaWeights {
  std::vector<double> lambda;
  double gamma{0.999};
  double eta{0.001};
  bool enabled{true};

  static RbaWeights make(std::size_t points, bool enabled, double gamma = 0.999, double eta = 0.001,
                         double initial = 0.0);
};

/// lambda_i <- gamma lambda_i + eta |R_i| / max|R|. `magnitudes` are |R_i|.
/// No change when max|R| = 0 or the weights are disabled.
void rba_update(RbaWeights& w, std::span<const double> magnitudes);

/// |lambda_i - |R_i| / max|R|| per point.
std::vector<double> steady_state_check(const RbaWeights& w, std::span<const double> magnitudes);

struct LambdaStats {
  double mean{0.0};
  double min{0.0};
  double max{0.0};
};
LambdaStats lambda_stats(std::span<const double> lambda);

}  // namespace pinnlab::rba
