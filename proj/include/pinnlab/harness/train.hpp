#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "pinnlab/harness/config.hpp"
#include "pinnlab/network.hpp"
#include "pinnlab/refsol.hpp"

namespace pinnlab::harness {

struct TrainResult {
  std::filesystem::path log_path;
  bool diverged{false};
  std::size_t last_iteration{0};
  nn::NetworkState net;
};

/// Reference data used for relative L2, or nothing when none is available
/// (cavity without centerline files). Allen-Cahn references are cached in
/// `reference_cache` (or the output directory).
std::optional<refsol::ReferenceGrid> load_case_reference(const RunConfig& config);

/// Network prediction at the reference points, matching the reference quantities.
std::vector<double> predict_on(const nn::NetworkState& net, const refsol::ReferenceGrid& ref,
                               const RunConfig& config);

/// Runs the full loop and writes train_log.csv, checkpoints and residual
/// snapshots into config.out_dir. Divergence ends the run with a partial log
/// marked `diverged=true`. `progress` receives a short line now and then.
TrainResult train(const RunConfig& config, std::ostream* progress = nullptr);

}  // namespace pinnlab::harness
