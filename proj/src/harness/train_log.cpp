#include "pinnlab/harness/train_log.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "pinnlab/errors.hpp"

namespace pinnlab::harness {

const std::vector<std::string>& base_columns() {
  static const std::vector<std::string> cols{
      "iter",   "loss",   "loss_res", "loss_bc",     "loss_ic",    "rel_l2",     "lr",           "snr",
      "srr_b",  "srr_c",  "homog",    "lambda_mean", "lambda_min", "lambda_max", "grad_mu_norm", "grad_sigma_norm"};
  return cols;
}

std::vector<std::string> log_columns(std::size_t hidden) {
  auto cols = base_columns();
  for (std::size_t k = 1; k <= hidden; ++k) {
    const auto s = std::to_string(k);
    for (const char* p : {"snr_l", "H_l", "binfrac_l", "pnorm_l"}) cols.push_back(p + s);
  }
  return cols;
}

std::string format_cell(double v) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::size_t TrainLog::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw InvalidArgument("log has no column '" + name + "'");
}

std::vector<double> TrainLog::column(const std::string& name) const {
  const auto k = index_of(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

std::vector<std::size_t> TrainLog::rows_with(const std::string& name) const {
  const auto k = index_of(name);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!std::isnan(rows[i][k])) out.push_back(i);
  return out;
}

RunConfig TrainLog::config() const {
  RunConfig c;
  std::string text;
  for (const auto& h : header)
    if (h.find('=') != std::string::npos && h.rfind("diverged", 0) != 0) text += h + "\n";
  apply_config_text(c, text);
  return c;
}

std::size_t TrainLog::hidden_layers() const { return (columns.size() - base_columns().size()) / 4; }

namespace {

double parse_cell(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("bad number '" + std::string(s) + "'", line);
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto c = s.find(',', pos);
    out.push_back(s.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

}  // namespace

TrainLog read_log(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open log " + path.string());
  TrainLog log;
  std::string line;
  std::size_t n = 0;
  double last_iter = -1.0;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      if (body.rfind("diverged=true", 0) == 0) log.diverged = true;
      log.header.push_back(std::move(body));
      continue;
    }
    const auto cells = split(line);
    if (log.columns.empty()) {
      for (auto c : cells) log.columns.emplace_back(c);
      if (log.columns.empty() || log.columns[0] != "iter") throw ParseError("first column must be 'iter'", n);
      continue;
    }
    if (cells.size() != log.columns.size()) {
      throw ParseError("expected " + std::to_string(log.columns.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       n);
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) row.push_back(parse_cell(c, n));
    if (!(row[0] > last_iter)) throw ParseError("iterations must be strictly increasing", n);
    last_iter = row[0];
    log.rows.push_back(std::move(row));
  }
  if (log.columns.empty()) throw ParseError("log has no column header", n + 1);
  return log;
}

LogWriter::LogWriter(const std::filesystem::path& path, const RunConfig& config)
    : os_(path), columns_(log_columns(config.layers.size() - 2)) {
  if (!os_) throw InvalidArgument("cannot write log " + path.string());
  os_ << "# " << kVersion << '\n';
  for (const auto& l : serialize(config)) os_ << "# " << l << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) os_ << (i ? "," : "") << columns_[i];
  os_ << '\n';
  os_.flush();
}

void LogWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) throw ShapeError("log row has the wrong number of cells");
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_cell(values[i]);
  }
  os_ << line << '\n';
  os_.flush();
}

void LogWriter::comment(const std::string& line) {
  os_ << "# " << line << '\n';
  os_.flush();
}

}  // namespace pinnlab::harness
