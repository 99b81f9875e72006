#include "pinnlab/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pinnlab/errors.hpp"

namespace pinnlab::harness {

RunConfig make_preset(pde::CaseId id, std::string_view preset) {
  const auto spec = pde::benchmark(id);
  RunConfig c;
  c.case_id = id;
  c.preset = std::string(preset);
  if (preset == "desk") {
    c.layers = {spec.input_dim, 32, 32, 32, 32, spec.outputs};
    c.points = 8192;
    c.iterations = 50000;
    c.log_every = 10;
  } else if (preset == "paper") {
    c.layers = {spec.input_dim, 64, 64, 64, 64, spec.outputs};
    c.points = spec.collocation;
    c.iterations = spec.iterations;
    c.log_every = 1;
    if (id == pde::CaseId::Burgers) c.batches = 25;
  } else {
    throw InvalidArgument("unknown preset '" + std::string(preset) + "' (expected desk or paper)");
  }
  c.out_dir = std::filesystem::path("runs") / (std::string(pde::case_name(id)) + "-" + c.preset);
  return c;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view value) {
  throw InvalidArgument("bad value '" + std::string(value) + "' for " + std::string(key));
}

template <class T>
T number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, v);
  return out;
}

bool boolean(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, v);
}

std::vector<int> int_list(std::string_view key, std::string_view v) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    const auto tok = trim(v.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    out.push_back(number<int>(key, tok));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

void apply_setting(RunConfig& c, std::string_view key, std::string_view v) {
  v = trim(v);
  if (key == "case") c.case_id = pde::parse_case(v);
  else if (key == "preset") c.preset = std::string(v);
  else if (key == "layers") c.layers = int_list(key, v);
  else if (key == "seed") c.seed = number<std::uint64_t>(key, v);
  else if (key == "iterations") c.iterations = number<std::size_t>(key, v);
  else if (key == "points") c.points = number<std::size_t>(key, v);
  else if (key == "batches") c.batches = number<std::size_t>(key, v);
  else if (key == "boundary_per_segment") c.boundary_per_segment = number<int>(key, v);
  else if (key == "initial_points") c.initial_points = number<int>(key, v);
  else if (key == "lr") c.adam.lr0 = number<double>(key, v);
  else if (key == "beta1") c.adam.beta1 = number<double>(key, v);
  else if (key == "beta2") c.adam.beta2 = number<double>(key, v);
  else if (key == "eps") c.adam.eps = number<double>(key, v);
  else if (key == "decay_rate") c.adam.decay_rate = number<double>(key, v);
  else if (key == "decay_interval") c.adam.decay_interval = number<double>(key, v);
  else if (key == "rba") c.rba = boolean(key, v);
  else if (key == "rba_gamma") c.rba_gamma = number<double>(key, v);
  else if (key == "rba_eta") c.rba_eta = number<double>(key, v);
  else if (key == "rba_init") c.rba_init = number<double>(key, v);
  else if (key == "diag_every") c.diag_every = number<std::size_t>(key, v);
  else if (key == "log_every") c.log_every = number<std::size_t>(key, v);
  else if (key == "checkpoint_every") c.checkpoint_every = number<std::size_t>(key, v);
  else if (key == "jump_factor") c.detector.jump_factor = number<double>(key, v);
  else if (key == "dwell") c.detector.dwell = number<std::size_t>(key, v);
  else if (key == "sma_window") c.detector.window = number<std::size_t>(key, v);
  else if (key == "probe_side") c.probe_side = number<int>(key, v);
  else if (key == "bins") c.bins = number<int>(key, v);
  else if (key == "saturation_delta") c.saturation_delta = number<double>(key, v);
  else if (key == "homog_cells") c.homog_cells = number<int>(key, v);
  else if (key == "reference_res") c.reference_res = number<int>(key, v);
  else if (key == "reference_dt") c.reference_dt = number<double>(key, v);
  else if (key == "eval_slices") c.eval_slices = number<int>(key, v);
  else if (key == "eval_nx") c.eval_nx = number<int>(key, v);
  else if (key == "block_size") c.block_size = number<std::size_t>(key, v);
  else if (key == "threads") c.threads = number<int>(key, v);
  else if (key == "out_dir") c.out_dir = std::string(v);
  else if (key == "reference_cache") c.reference_cache = std::string(v);
  else if (key == "cavity_u_csv") c.cavity_u_csv = std::string(v);
  else if (key == "cavity_v_csv") c.cavity_v_csv = std::string(v);
  else throw InvalidArgument("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& config, std::string_view text) {
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    try {
      apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  apply_config_text(config, ss.str());
}

std::vector<std::string> serialize(const RunConfig& c) {
  std::string layers;
  for (std::size_t i = 0; i < c.layers.size(); ++i) layers += (i ? "," : "") + std::to_string(c.layers[i]);
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      "case = " + std::string(pde::case_name(c.case_id)),
      "preset = " + c.preset,
      "layers = " + layers,
      "seed = " + std::to_string(c.seed),
      "iterations = " + std::to_string(c.iterations),
      "points = " + std::to_string(c.points),
      "batches = " + std::to_string(c.batches),
      "boundary_per_segment = " + std::to_string(c.boundary_per_segment),
      "initial_points = " + std::to_string(c.initial_points),
      "lr = " + fmt(c.adam.lr0),
      "beta1 = " + fmt(c.adam.beta1),
      "beta2 = " + fmt(c.adam.beta2),
      "eps = " + fmt(c.adam.eps),
      "decay_rate = " + fmt(c.adam.decay_rate),
      "decay_interval = " + fmt(c.adam.decay_interval),
      "rba = " + b(c.rba),
      "rba_gamma = " + fmt(c.rba_gamma),
      "rba_eta = " + fmt(c.rba_eta),
      "rba_init = " + fmt(c.rba_init),
      "diag_every = " + std::to_string(c.diag_every),
      "log_every = " + std::to_string(c.log_every),
      "checkpoint_every = " + std::to_string(c.checkpoint_every),
      "jump_factor = " + fmt(c.detector.jump_factor),
      "dwell = " + std::to_string(c.detector.dwell),
      "sma_window = " + std::to_string(c.detector.window),
      "probe_side = " + std::to_string(c.probe_side),
      "bins = " + std::to_string(c.bins),
      "saturation_delta = " + fmt(c.saturation_delta),
      "homog_cells = " + std::to_string(c.homog_cells),
      "reference_res = " + std::to_string(c.reference_res),
      "reference_dt = " + fmt(c.reference_dt),
      "eval_slices = " + std::to_string(c.eval_slices),
      "eval_nx = " + std::to_string(c.eval_nx),
      "block_size = " + std::to_string(c.block_size),
      "threads = " + std::to_string(c.threads),
      "out_dir = " + c.out_dir.string(),
      "reference_cache = " + c.reference_cache.string(),
      "cavity_u_csv = " + c.cavity_u_csv.string(),
      "cavity_v_csv = " + c.cavity_v_csv.string(),
  };
}

void validate(const RunConfig& c) {
  const auto spec = pde::benchmark(c.case_id);
  auto fail = [](const std::string& m) { throw InvalidArgument(m); };
  if (c.layers.size() < 3) fail("layers needs input, at least one hidden and output widths");
  if (c.layers.front() != spec.input_dim) fail("first layer width must equal the input dimension");
  if (c.layers.back() != spec.outputs) fail("last layer width must equal the number of outputs");
  if (c.batches < 2) fail("at least two batches are required for batch statistics");
  if (c.points == 0 || c.points % c.batches != 0) fail("points must be a positive multiple of batches");
  if (c.diag_every == 0 || c.log_every == 0 || c.checkpoint_every == 0) fail("cadences must be positive");
  if (c.rba_gamma < 0.0 || c.rba_eta < 0.0) fail("RBA coefficients must be non-negative");
  if (c.adam.lr0 <= 0.0 || c.adam.decay_interval <= 0.0 || c.adam.decay_rate <= 0.0) fail("bad learning-rate schedule");
  if (c.probe_side < 2) fail("probe_side must be at least 2");
  if (c.homog_cells < 2) fail("homog_cells must be at least 2");
  if (c.boundary_per_segment < 1 || c.initial_points < 1) fail("trace point counts must be positive");
  if (c.block_size == 0) fail("block_size must be positive");
}

}  // namespace pinnlab::harness
