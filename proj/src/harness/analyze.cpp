#include "pinnlab/harness/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <sstream>

#include "pinnlab/errors.hpp"

namespace pinnlab::harness {

namespace fs = std::filesystem;

std::optional<std::size_t> iterations_to(const TrainLog& log, double threshold) {
  const auto it = log.index_of("iter"), l2 = log.index_of("rel_l2");
  for (const auto& r : log.rows)
    if (!std::isnan(r[l2]) && r[l2] <= threshold) return static_cast<std::size_t>(r[it]);
  return std::nullopt;
}

IdentityCheck check_identity(const TrainLog& log) {
  IdentityCheck c;
  const auto is = log.index_of("snr"), ir = log.index_of("srr_b");
  const double knee = std::sqrt(2.0) / 2.0;
  for (const auto& row : log.rows) {
    const double s = row[is], r = row[ir];
    if (std::isnan(s) || std::isnan(r)) continue;
    ++c.rows;
    if (std::isfinite(s) && s > 0.0) {
      const double gap = std::abs(s - diag::snr_from_srr(r)) / s;
      c.max_relative_gap = std::max(c.max_relative_gap, gap);
      if (!(gap < 1e-10)) ++c.identity_failures;
    }
    if ((s > 1.0) != (r > knee)) ++c.threshold_failures;
    if (r > 0.0 && r < 0.1) {
      ++c.small_rows;
      if (!(std::abs(s - r) / r < 0.01)) ++c.small_failures;
    }
  }
  return c;
}

Analysis analyze(const TrainLog& log) {
  Analysis a;
  const auto cfg = log.config();
  a.diverged = log.diverged;
  const auto it = log.index_of("iter");
  if (!log.rows.empty()) a.last_iteration = static_cast<std::size_t>(log.rows.back()[it]);
  const auto is = log.index_of("snr"), ir = log.index_of("srr_b"), ic = log.index_of("srr_c"),
             il = log.index_of("rel_l2");
  for (auto i : log.rows_with("snr")) {
    const auto& r = log.rows[i];
    a.diag_iterations.push_back(static_cast<std::size_t>(r[it]));
    a.snr.push_back(r[is]);
    a.srr_b.push_back(r[ir]);
    a.srr_c.push_back(r[ic]);
    a.rel_l2.push_back(r[il]);
  }
  a.snr_smoothed = diag::sma(a.snr, cfg.detector.window);
  a.phases = diag::detect_phases(a.diag_iterations, a.snr_smoothed, a.rel_l2, cfg.detector);
  std::vector<double> ls, lc;
  for (std::size_t i = 0; i < a.snr.size(); ++i) {
    ls.push_back(std::log(a.snr_smoothed[i]));
    lc.push_back(std::log(a.srr_c[i]));
  }
  a.correlation = diag::pearson(ls, lc);
  a.iterations_to_10pct = iterations_to(log, 0.10);
  a.iterations_to_5pct = iterations_to(log, 0.05);
  const auto l2rows = log.rows_with("rel_l2");
  if (!l2rows.empty()) a.final_rel_l2 = log.rows[l2rows.back()][il];
  const auto hrows = log.rows_with("homog");
  if (!hrows.empty()) a.final_homogeneity = log.rows[hrows.back()][log.index_of("homog")];
  a.identity = check_identity(log);
  return a;
}

namespace {

template <class T>
std::string opt_text(const std::optional<T>& v) {
  if (!v) return "absent";
  std::ostringstream os;
  os.precision(6);
  os << *v;
  return os.str();
}

template <class T>
nlohmann::json opt_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string phase_at(const diag::PhaseReport& p, std::size_t i) { return diag::phase_name(p.labels[i]); }

}  // namespace

std::string analysis_text(const Analysis& a) {
  std::ostringstream os;
  const auto& p = a.phases;
  os << "phase report\n";
  os << "  detector: jump_factor=" << p.params.jump_factor << " dwell=" << p.params.dwell
     << " window=" << p.params.window << '\n';
  os << "  fitting end:            " << opt_text(p.fitting_end) << '\n';
  os << "  total-diffusion onset:  " << opt_text(p.total_diffusion_onset) << '\n';
  os << "  late phase start:       " << opt_text(p.late_start) << '\n';
  if (p.steepest_l2) {
    os << "  steepest log-L2 drop:   [" << p.steepest_l2->first << ", " << p.steepest_l2->second
       << "] slope " << p.steepest_l2_slope << '\n';
  } else {
    os << "  steepest log-L2 drop:   absent\n";
  }
  os << "summary\n";
  os << "  last iteration:         " << a.last_iteration << (a.diverged ? " (diverged)" : "") << '\n';
  os << "  final rel_l2:           " << opt_text(a.final_rel_l2) << '\n';
  os << "  final homogeneity:      " << opt_text(a.final_homogeneity) << '\n';
  os << "  iterations to 10%:      " << opt_text(a.iterations_to_10pct) << '\n';
  os << "  iterations to 5%:       " << opt_text(a.iterations_to_5pct) << '\n';
  os << "  corr(log SNR, log SRR_C): " << opt_text(a.correlation) << '\n';
  os << "  identity rows:          " << a.identity.rows << " (failures " << a.identity.identity_failures
     << ", max gap " << a.identity.max_relative_gap << ")\n";
  os << "  threshold failures:     " << a.identity.threshold_failures << '\n';
  os << "  small-SRR rows:         " << a.identity.small_rows << " (failures " << a.identity.small_failures
     << ")\n";
  return os.str();
}

std::string analysis_json(const Analysis& a) {
  const auto& p = a.phases;
  nlohmann::json j;
  j["detector"] = {{"jump_factor", p.params.jump_factor}, {"dwell", p.params.dwell}, {"window", p.params.window}};
  j["fitting_end"] = opt_json(p.fitting_end);
  j["total_diffusion_onset"] = opt_json(p.total_diffusion_onset);
  j["late_start"] = opt_json(p.late_start);
  j["steepest_l2"] = p.steepest_l2 ? nlohmann::json{p.steepest_l2->first, p.steepest_l2->second}
                                   : nlohmann::json(nullptr);
  j["steepest_l2_slope"] = p.steepest_l2 ? nlohmann::json(p.steepest_l2_slope) : nlohmann::json(nullptr);
  j["last_iteration"] = a.last_iteration;
  j["diverged"] = a.diverged;
  j["final_rel_l2"] = opt_json(a.final_rel_l2);
  j["final_homogeneity"] = opt_json(a.final_homogeneity);
  j["iterations_to_10pct"] = opt_json(a.iterations_to_10pct);
  j["iterations_to_5pct"] = opt_json(a.iterations_to_5pct);
  j["correlation_log_snr_srr_c"] = opt_json(a.correlation);
  j["identity"] = {{"rows", a.identity.rows},
                   {"failures", a.identity.identity_failures},
                   {"max_relative_gap", a.identity.max_relative_gap},
                   {"threshold_failures", a.identity.threshold_failures},
                   {"small_rows", a.identity.small_rows},
                   {"small_failures", a.identity.small_failures}};
  return j.dump(2);
}

void write_analysis_csv(const fs::path& path, const Analysis& a) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  const auto& p = a.phases;
  os << "# fitting_end=" << opt_text(p.fitting_end) << '\n';
  os << "# total_diffusion_onset=" << opt_text(p.total_diffusion_onset) << '\n';
  os << "# late_start=" << opt_text(p.late_start) << '\n';
  os << "# steepest_l2=" << (p.steepest_l2 ? std::to_string(p.steepest_l2->first) + ":" +
                                                 std::to_string(p.steepest_l2->second)
                                           : std::string("absent"))
     << '\n';
  os << "# correlation=" << opt_text(a.correlation) << '\n';
  os << "# iterations_to_10pct=" << opt_text(a.iterations_to_10pct) << '\n';
  os << "# iterations_to_5pct=" << opt_text(a.iterations_to_5pct) << '\n';
  os << "iter,snr,snr_sma,srr_b,srr_c,rel_l2,phase\n";
  for (std::size_t i = 0; i < a.diag_iterations.size(); ++i) {
    os << a.diag_iterations[i] << ',' << format_cell(a.snr[i]) << ',' << format_cell(a.snr_smoothed[i]) << ','
       << format_cell(a.srr_b[i]) << ',' << format_cell(a.srr_c[i]) << ',' << format_cell(a.rel_l2[i]) << ','
       << phase_at(p, i) << '\n';
  }
}

namespace {

void write_columns(const fs::path& path, const TrainLog& log, const std::vector<std::string>& cols,
                   const std::string& require) {
  std::ofstream os(path);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  std::vector<std::size_t> idx;
  for (const auto& c : cols) idx.push_back(log.index_of(c));
  for (auto r : log.rows_with(require)) {
    for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? "," : "") << format_cell(log.rows[r][idx[i]]);
    os << '\n';
  }
}

}  // namespace

void write_report(const fs::path& log_path, const fs::path& out_dir) {
  const auto log = read_log(log_path);
  const auto a = analyze(log);
  fs::create_directories(out_dir);
  write_analysis_csv(out_dir / "analysis.csv", a);
  write_columns(out_dir / "convergence.csv", log, {"iter", "loss", "loss_res", "loss_bc", "loss_ic", "rel_l2", "lr"},
                "loss");
  write_columns(out_dir / "noise.csv", log, {"iter", "grad_mu_norm", "grad_sigma_norm"}, "snr");
  write_columns(out_dir / "lambda.csv", log, {"iter", "lambda_mean", "lambda_min", "lambda_max", "homog"}, "snr");
  {
    std::ofstream os(out_dir / "snr.csv");
    os << "iter,snr,snr_sma,srr_b,srr_c,phase\n";
    for (std::size_t i = 0; i < a.diag_iterations.size(); ++i) {
      os << a.diag_iterations[i] << ',' << format_cell(a.snr[i]) << ',' << format_cell(a.snr_smoothed[i]) << ','
         << format_cell(a.srr_b[i]) << ',' << format_cell(a.srr_c[i]) << ',' << phase_at(a.phases, i) << '\n';
    }
  }
  {
    std::ofstream os(out_dir / "layers.csv");
    os << "iter,layer,snr,entropy,binfrac,pnorm\n";
    const auto it = log.index_of("iter");
    for (auto r : log.rows_with("snr")) {
      for (std::size_t k = 1; k <= log.hidden_layers(); ++k) {
        const auto s = std::to_string(k);
        const auto& row = log.rows[r];
        os << format_cell(row[it]) << ',' << k << ',' << format_cell(row[log.index_of("snr_l" + s)]) << ','
           << format_cell(row[log.index_of("H_l" + s)]) << ',' << format_cell(row[log.index_of("binfrac_l" + s)])
           << ',' << format_cell(row[log.index_of("pnorm_l" + s)]) << '\n';
      }
    }
  }
  {
    std::ofstream os(out_dir / "phases.csv");
    os << "phase,start,end\n";
    const auto& p = a.phases;
    for (std::size_t i = 0; i < p.labels.size();) {
      std::size_t j = i;
      while (j + 1 < p.labels.size() && p.labels[j + 1] == p.labels[i]) ++j;
      os << diag::phase_name(p.labels[i]) << ',' << p.iterations[i] << ',' << p.iterations[j] << '\n';
      i = j + 1;
    }
  }
  {
    std::ofstream os(out_dir / "summary.csv");
    os << "key,value\n";
    os << "case," << pde::case_name(log.config().case_id) << '\n';
    os << "rba," << (log.config().rba ? "true" : "false") << '\n';
    os << "fitting_end," << opt_text(a.phases.fitting_end) << '\n';
    os << "total_diffusion_onset," << opt_text(a.phases.total_diffusion_onset) << '\n';
    os << "late_start," << opt_text(a.phases.late_start) << '\n';
    os << "correlation," << opt_text(a.correlation) << '\n';
    os << "iterations_to_10pct," << opt_text(a.iterations_to_10pct) << '\n';
    os << "iterations_to_5pct," << opt_text(a.iterations_to_5pct) << '\n';
    os << "final_rel_l2," << opt_text(a.final_rel_l2) << '\n';
    os << "diverged," << (a.diverged ? "true" : "false") << '\n';
  }
  const std::regex snap_name(R"(residuals_(\d+)\.csv)");
  std::vector<std::pair<std::size_t, fs::path>> snaps;
  for (const auto& e : fs::directory_iterator(log_path.parent_path().empty() ? fs::path(".") : log_path.parent_path())) {
    std::smatch m;
    const auto name = e.path().filename().string();
    if (std::regex_match(name, m, snap_name)) snaps.emplace_back(std::stoull(m[1]), e.path());
  }
  std::sort(snaps.begin(), snaps.end());
  std::ofstream os(out_dir / "residuals.csv");
  bool header = false;
  for (const auto& [iter, path] : snaps) {
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    if (!header) {
      os << "iter," << line << '\n';
      header = true;
    }
    while (std::getline(is, line))
      if (!line.empty()) os << iter << ',' << line << '\n';
  }
}

}  // namespace pinnlab::harness
