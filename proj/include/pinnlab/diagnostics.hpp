#pragma once

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinnlab/autodiff/loss.hpp"
#include "pinnlab/network.hpp"
#include "pinnlab/pde.hpp"

namespace pinnlab::diag {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Per-parameter statistics of the batch gradients (population convention).
struct GradStats {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  Eigen::VectorXd rms;
  std::size_t batches{0};
  std::size_t iteration{0};

  double mu_norm() const { return mu.norm(); }
  double sigma_norm() const { return sigma.norm(); }
};

/// Throws InvalidArgument for fewer than two batches, ShapeError on size mismatch.
GradStats batch_grad_stats(const std::vector<ad::ParamGradient>& batch_grads, std::size_t iteration = 0);

/// ||mu|| / ||sigma||; +inf when only sigma vanishes, 0 when both do.
double snr(const GradStats& s);
/// ||mu|| / ||rms||; 0 when both vanish.
double srr_b(const GradStats& s);
/// srr / sqrt(1 - srr^2); +inf for srr >= 1, InvalidArgument for srr < 0.
double snr_from_srr(double srr);

/// SNR restricted to each affine layer's parameter range (weights and biases).
std::vector<double> layer_snr(const GradStats& s, const nn::NetworkState& net);
std::vector<double> layer_snr(const std::vector<ad::ParamGradient>& batch_grads, const nn::NetworkState& net);

struct LayerNorms {
  double mu_sq{0.0};
  double sigma_sq{0.0};
};
std::vector<LayerNorms> layer_norms(const GradStats& s, const nn::NetworkState& net);

/// Trailing mean over min(window, count so far) values. Throws InvalidArgument
/// for window < 1.
std::vector<double> sma(std::span<const double> series, std::size_t window = 10);

struct Homogeneity {
  double value{0.0};
  int cells_per_axis{0};
  bool reduced{false};  // some requested cells were empty
};

/// Coefficient of variation of the cell-averaged |R| over a regular grid of
/// `cells` per axis. Empty cells make the grid coarser; InvalidArgument if even
/// two cells per axis leave one empty. `points` holds one point per column.
Homogeneity residual_homogeneity(const Eigen::MatrixXd& points, std::span<const double> magnitudes,
                                 std::span<const pde::Interval> domain, int cells = 8);

enum class Phase { Fitting, Diffusion, TotalDiffusion, Late };
std::string phase_name(Phase p);

struct DetectorParams {
  double jump_factor{4.0};
  std::size_t dwell{5};
  std::size_t window{10};
};

struct PhaseReport {
  DetectorParams params;
  std::vector<std::size_t> iterations;
  std::vector<Phase> labels;
  std::optional<std::size_t> fitting_end;
  std::optional<std::size_t> total_diffusion_onset;
  std::optional<std::size_t> late_start;
  /// Iteration range of the steepest drop of log(l2) over `window` samples.
  std::optional<std::pair<std::size_t, std::size_t>> steepest_l2;
  double steepest_l2_slope{0.0};
};

/// Phases from an already smoothed SNR series. Fitting is the leading run with
/// SNR > 1; total diffusion starts at the first sample whose SNR reaches
/// jump_factor times the running minimum since diffusion began and stays there
/// for `dwell` samples; the late phase starts when SNR drops back below that
/// level for `dwell` samples. `l2` may contain NaN for missing values.
PhaseReport detect_phases(std::span<const std::size_t> iterations, std::span<const double> snr_smoothed,
                          std::span<const double> l2, DetectorParams params = {});

/// Pearson correlation of the finite pairs; nullopt with fewer than three pairs
/// or a constant series.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

}  // namespace pinnlab::diag
