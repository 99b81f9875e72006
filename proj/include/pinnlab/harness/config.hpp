#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pinnlab/diagnostics.hpp"
#include "pinnlab/optimizer.hpp"
#include "pinnlab/pde.hpp"

namespace pinnlab::harness {

inline constexpr std::string_view kVersion = "pinnlab 0.1.0";

struct RunConfig {
  pde::CaseId case_id{pde::CaseId::AllenCahn};
  std::string preset{"desk"};
  std::vector<int> layers{2, 32, 32, 32, 32, 1};
  std::uint64_t seed{0};
  std::size_t iterations{50000};
  std::size_t points{8192};
  std::size_t batches{32};
  int boundary_per_segment{256};
  int initial_points{512};
  opt::AdamConfig adam;
  bool rba{false};
  double rba_gamma{0.999};
  double rba_eta{0.001};
  double rba_init{0.0};
  std::size_t diag_every{100};
  std::size_t log_every{10};
  std::size_t checkpoint_every{10000};
  diag::DetectorParams detector;
  int probe_side{64};
  int bins{30};
  double saturation_delta{0.01};
  int homog_cells{8};
  int reference_res{16384};
  double reference_dt{1e-4};
  int eval_slices{51};
  int eval_nx{256};
  std::size_t block_size{256};
  int threads{0};
  std::filesystem::path out_dir{"runs/out"};
  std::filesystem::path reference_cache;
  std::filesystem::path cavity_u_csv;
  std::filesystem::path cavity_v_csv;
};

/// Defaults for a benchmark: "desk" (8192 points, 5e4 iterations, 4x32 net)
/// or "paper" (benchmark point counts and budgets, 4x64 net). Throws
/// InvalidArgument for other names.
RunConfig make_preset(pde::CaseId id, std::string_view preset);

/// Set one field from its text form. Throws InvalidArgument naming the key for
/// unknown keys or malformed values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Apply a `key = value` file on top of `config`. Blank lines and lines
/// starting with '#' are skipped. Errors carry the line number.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
void apply_config_text(RunConfig& config, std::string_view text);

/// Canonical `key = value` lines (no trailing newline on the last one).
std::vector<std::string> serialize(const RunConfig& config);

/// Throws InvalidArgument on inconsistent settings.
void validate(const RunConfig& config);

}  // namespace pinnlab::harness
