#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pinnlab/diagnostics.hpp"
#include "pinnlab/harness/train_log.hpp"

namespace pinnlab::harness {

/// Consistency of the logged (snr, srr_b) pairs.
struct IdentityCheck {
  std::size_t rows{0};
  std::size_t identity_failures{0};  // relative gap above 1e-10
  double max_relative_gap{0.0};
  std::size_t threshold_failures{0};  // snr > 1 disagrees with srr_b > sqrt(2)/2
  std::size_t small_rows{0};           // rows with srr_b < 0.1
  std::size_t small_failures{0};       // |snr - srr_b| / srr_b >= 1%
};

struct Analysis {
  diag::PhaseReport phases;
  std::vector<std::size_t> diag_iterations;
  std::vector<double> snr;
  std::vector<double> snr_smoothed;
  std::vector<double> srr_b;
  std::vector<double> srr_c;
  std::vector<double> rel_l2;  // at the diagnostic rows
  std::optional<double> correlation;  // log smoothed SNR vs log SRR_C
  std::optional<std::size_t> iterations_to_10pct;
  std::optional<std::size_t> iterations_to_5pct;
  std::optional<double> final_rel_l2;
  std::optional<double> final_homogeneity;
  IdentityCheck identity;
  bool diverged{false};
  std::size_t last_iteration{0};
};

Analysis analyze(const TrainLog& log);

/// First logged iteration with rel_l2 <= threshold.
std::optional<std::size_t> iterations_to(const TrainLog& log, double threshold);

IdentityCheck check_identity(const TrainLog& log);

std::string analysis_text(const Analysis& a);
std::string analysis_json(const Analysis& a);

/// One row per diagnostic iteration (iter, snr, snr_sma, srr_b, srr_c,
/// rel_l2, phase) under '#' summary lines.
void write_analysis_csv(const std::filesystem::path& path, const Analysis& a);

/// Tidy CSVs for plotting: convergence, snr, layers, noise, lambda, phases,
/// summary and the residual snapshots found next to the log.
void write_report(const std::filesystem::path& log_path, const std::filesystem::path& out_dir);

}  // namespace pinnlab::harness
