#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pinnlab/harness/config.hpp"

namespace pinnlab::harness {

/// Fixed leading columns of every log; per-layer columns follow.
const std::vector<std::string>& base_columns();
/// `snr_l{k}, H_l{k}, binfrac_l{k}, pnorm_l{k}` for hidden layers k = 1..hidden.
std::vector<std::string> log_columns(std::size_t hidden);

/// A parsed log. Missing cells read as NaN.
struct TrainLog {
  std::vector<std::string> header;  // comment lines without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  bool diverged{false};

  std::size_t index_of(const std::string& column) const;  // throws InvalidArgument
  std::vector<double> column(const std::string& name) const;
  /// Rows where `name` is present (not NaN).
  std::vector<std::size_t> rows_with(const std::string& name) const;
  /// RunConfig rebuilt from the header.
  RunConfig config() const;
  std::size_t hidden_layers() const;
};

/// Throws ParseError (with line number) on malformed content.
TrainLog read_log(const std::filesystem::path& path);

/// Streaming writer; rows are appended and flushed as they are produced.
class LogWriter {
 public:
  LogWriter(const std::filesystem::path& path, const RunConfig& config);
  void row(const std::vector<double>& values);
  void comment(const std::string& line);
  std::size_t width() const { return columns_.size(); }

 private:
  std::ofstream os_;
  std::vector<std::string> columns_;
};

/// Text form used in logs: shortest round-trip digits, empty for NaN.
std::string format_cell(double v);

}  // namespace pinnlab::harness
