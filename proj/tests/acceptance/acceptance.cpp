#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pinnlab/autodiff/kernel.hpp"
#include "pinnlab/autodiff/reference.hpp"
#include "pinnlab/diagnostics.hpp"
#include "pinnlab/harness/analyze.hpp"
#include "pinnlab/harness/train.hpp"
#include "pinnlab/harness/train_log.hpp"
#include "pinnlab/optimizer.hpp"
#include "pinnlab/pde.hpp"
#include "pinnlab/rba.hpp"
#include "pinnlab/refsol.hpp"

using namespace pinnlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass{false};
  std::string summary;
  std::vector<std::string> notes;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string fmt_opt(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "none"; }

constexpr std::array<pde::CaseId, 4> kCases{pde::CaseId::AllenCahn, pde::CaseId::Helmholtz, pde::CaseId::Burgers,
                                            pde::CaseId::Cavity};

// Desk runs shared by several criteria. A cached run is reused when its logged
// configuration matches and it reached the budget (or diverged).
class RunStore {
 public:
  explicit RunStore(fs::path dir) : dir_(std::move(dir)) {}

  harness::RunConfig config(pde::CaseId id, bool rba, std::uint64_t seed) const {
    auto c = harness::make_preset(id, "desk");
    c.rba = rba;
    c.seed = seed;
    c.reference_cache = dir_ / "refcache";
    c.out_dir = dir_ / (std::string(pde::case_name(id)) + (rba ? "-rba-s" : "-vanilla-s") + std::to_string(seed));
    return c;
  }

  const harness::TrainLog& get(pde::CaseId id, bool rba, std::uint64_t seed) {
    const auto c = config(id, rba, seed);
    const auto key = c.out_dir.string();
    if (auto it = logs_.find(key); it != logs_.end()) return it->second;
    const auto path = c.out_dir / "train_log.csv";
    if (!usable(path, c)) {
      std::cerr << "training " << c.out_dir.filename().string() << " (" << c.iterations << " iterations)\n";
      fs::remove_all(c.out_dir);
      harness::train(c, &std::cerr);
    }
    return logs_.emplace(key, harness::read_log(path)).first->second;
  }

  std::vector<const harness::TrainLog*> all() {
    std::vector<const harness::TrainLog*> out;
    for (auto id : {pde::CaseId::AllenCahn, pde::CaseId::Helmholtz})
      for (bool rba : {true, false}) out.push_back(&get(id, rba, 0));
    for (std::uint64_t s : {1, 2})
      for (bool rba : {true, false}) out.push_back(&get(pde::CaseId::AllenCahn, rba, s));
    return out;
  }

  const fs::path& dir() const { return dir_; }

 private:
  static std::vector<std::string> comparable(const harness::RunConfig& c) {
    std::vector<std::string> out;
    for (auto& l : harness::serialize(c))
      if (l.rfind("out_dir", 0) != 0 && l.rfind("reference_cache", 0) != 0) out.push_back(l);
    return out;
  }

  static bool usable(const fs::path& path, const harness::RunConfig& c) {
    if (!fs::exists(path)) return false;
    try {
      const auto log = harness::read_log(path);
      if (comparable(log.config()) != comparable(c)) return false;
      if (log.diverged) return true;
      return !log.rows.empty() && log.rows.back()[0] == static_cast<double>(c.iterations);
    } catch (const std::exception&) {
      return false;
    }
  }

  fs::path dir_;
  std::map<std::string, harness::TrainLog> logs_;
};

double max_abs_rel(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 1e-300;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

nn::NetworkState random_net(std::vector<int> sizes, std::mt19937_64& rng) {
  auto net = nn::init(std::move(sizes), rng());
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto b = net.biases(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = u(rng);
  }
  return net;
}

Outcome gradient_correctness() {
  Outcome o;
  double worst = 0.0;
  std::size_t checks = 0;
  for (auto id : kCases) {
    const auto spec = pde::benchmark(id);
    std::mt19937_64 rng(1000 + static_cast<int>(id));
    std::uniform_int_distribution<int> width(3, 8), depth(1, 3), bsel(0, 2), msel(2, 6), seg(2, 4);
    double case_worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> sizes{2};
      for (int l = depth(rng); l > 0; --l) sizes.push_back(width(rng));
      sizes.push_back(spec.outputs);
      auto net = random_net(sizes, rng);
      const std::size_t batches = std::size_t{1} << bsel(rng);
      const std::size_t n = batches * static_cast<std::size_t>(msel(rng));
      const auto set = pde::sample_collocation(
          spec, rng(), n, {.per_segment = static_cast<std::size_t>(seg(rng)), .initial = static_cast<std::size_t>(2 * seg(rng))});
      const auto loss = pde::assemble_loss(spec, set, batches);
      std::vector<double> lambda(n);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (auto& l : lambda) l = u(rng);
      const auto g = ad::loss_and_param_grad(net, loss, lambda, {.block_size = 1 + rng() % 7}).second;
      std::vector<double> fd(net.num_params());
      const auto field_loss = [&](const nn::NetworkState& nt) {
        return ad::evaluate_field_loss(
                   loss, [&](std::span<const double> x, int order) { return ad::forward_jets(nt, x, order); }, lambda)
            .total;
      };
      const double h = 1e-4;
      for (std::size_t i = 0; i < fd.size(); ++i) {
        const double x = net.params()[i];
        net.params()[i] = x + h;
        const double fp = field_loss(net);
        net.params()[i] = x - h;
        const double fm = field_loss(net);
        net.params()[i] = x;
        fd[i] = (fp - fm) / (2.0 * h);
      }
      case_worst = std::max(case_worst, max_abs_rel(g.values, fd));
      ++checks;
    }
    o.notes.push_back(std::string(pde::case_name(id)) + ": worst relative error " + fmt(case_worst) + " over 20 nets");
    worst = std::max(worst, case_worst);
  }
  o.pass = worst < 1e-5;
  o.summary = std::to_string(checks) + " gradients, worst relative error " + fmt(worst) + " (limit 1e-5)";
  return o;
}

double rel(double a, double b, double floor) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor}); }

Outcome jet_correctness() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> width(4, 16), depth(1, 3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-4, floor = 1e-2;
  double worst = 0.0;
  const auto stencil = ad::Stencil::full(2, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> sizes{2};
    for (int l = depth(rng); l > 0; --l) sizes.push_back(width(rng));
    sizes.push_back(1);
    const auto net = random_net(sizes, rng);
    Eigen::MatrixXd pts(2, 10);
    for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(0, j) = u(rng), pts(1, j) = u(rng);
    const auto jets = ad::forward_stencil(net, pts, stencil);
    for (Eigen::Index p = 0; p < pts.cols(); ++p) {
      const auto& j = jets[static_cast<std::size_t>(p)];
      for (int a = 0; a < 2; ++a) {
        double xp[] = {pts(0, p), pts(1, p)}, xm[] = {pts(0, p), pts(1, p)};
        xp[a] += h;
        xm[a] -= h;
        const auto jp = ad::forward_jet(net, xp, 3), jm = ad::forward_jet(net, xm, 3);
        worst = std::max(worst, rel(j.d(a), (jp.value() - jm.value()) / (2 * h), floor));
        for (int b = 0; b < 2; ++b) {
          worst = std::max(worst, rel(j.d(a, b), (jp.d(b) - jm.d(b)) / (2 * h), floor));
          for (int c = 0; c < 2; ++c) worst = std::max(worst, rel(j.d(a, b, c), (jp.d(b, c) - jm.d(b, c)) / (2 * h), floor));
        }
      }
    }
  }
  o.notes.push_back("first, second and third derivatives of 20 random nets at 10 points each");

  bool exact = true;
  for (double w : {0.7, 3.0, -1.3, 2.5}) {
    nn::NetworkState net({1, 1, 1});
    net.weights(0)(0, 0) = w;
    net.weights(1)(0, 0) = 1.0;
    const double x0[] = {0.0};
    const Eigen::MatrixXd p0 = Eigen::MatrixXd::Zero(1, 1);
    const auto kj = ad::forward_stencil(net, p0, ad::Stencil::full(1, 3)).front();
    for (const auto& j : {kj, ad::forward_jet(net, x0, 3)}) {
      exact = exact && j.value() == 0.0 && j.d(0) == w && j.d(0, 0) == 0.0 && j.d(0, 0, 0) == -2.0 * w * w * w;
    }
  }
  o.notes.push_back(std::string("tanh at zero: ") + (exact ? "exact" : "mismatch"));
  o.pass = worst < 1e-5 && exact;
  o.summary = "worst relative error " + fmt(worst) + " (limit 1e-5), tanh-at-zero " + (exact ? "exact" : "mismatch");
  return o;
}

Outcome exact_residuals() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0), t01(0.0, 1.0);
  double hm = 0.0, bg = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), y = u(rng);
    hm = std::max(hm, std::abs(pde::helmholtz_residual(refsol::helmholtz_exact_jet(x, y, 2), x, y)));
  }
  for (int i = 0; i < 1000; ++i) {
    const double t = std::max(t01(rng), 1e-3), x = u(rng);
    bg = std::max(bg, std::abs(pde::burgers_residual(refsol::burgers_cole_hopf_jet(t, x, 2))));
  }
  o.pass = hm < 1e-8 && bg < 1e-4;
  o.summary = "max |R| helmholtz " + fmt(hm) + " (limit 1e-8), burgers " + fmt(bg) + " (limit 1e-4), 1000 points each";
  return o;
}

Outcome identity(RunStore& store) {
  Outcome o;
  harness::IdentityCheck total;
  std::size_t cond_rows = 0, cond_fail = 0;
  for (const auto* log : store.all()) {
    const auto c = harness::check_identity(*log);
    total.rows += c.rows;
    total.identity_failures += c.identity_failures;
    total.threshold_failures += c.threshold_failures;
    total.small_rows += c.small_rows;
    total.small_failures += c.small_failures;
    total.max_relative_gap = std::max(total.max_relative_gap, c.max_relative_gap);
    const auto snr = log->column("snr"), srr = log->column("srr_b");
    for (std::size_t i = 0; i < snr.size(); ++i) {
      if (std::isnan(snr[i]) || !(snr[i] <= 1e3)) continue;
      ++cond_rows;
      if (std::abs(snr[i] - diag::snr_from_srr(srr[i])) / snr[i] >= 1e-10) ++cond_fail;
    }
  }
  o.pass = total.rows > 0 && total.identity_failures == 0 && total.threshold_failures == 0 && total.small_failures == 0;
  o.summary = std::to_string(total.rows) + " rows: identity failures " + std::to_string(total.identity_failures) +
              " (max gap " + fmt(total.max_relative_gap) + "), threshold failures " +
              std::to_string(total.threshold_failures) + ", small-srr failures " + std::to_string(total.small_failures) +
              "/" + std::to_string(total.small_rows);
  o.notes.push_back("rows with snr <= 1e3: " + std::to_string(cond_fail) + " identity failures of " +
                    std::to_string(cond_rows));
  return o;
}

bool unit_lambda_matches_vanilla(const fs::path& dir) {
  auto v = harness::make_preset(pde::CaseId::AllenCahn, "desk");
  v.iterations = 10;
  v.log_every = 1;
  v.reference_cache = dir / "refcache";
  auto r = v;
  r.rba = true;
  r.rba_gamma = 1.0;
  r.rba_eta = 0.0;
  r.rba_init = 1.0;
  v.out_dir = dir / "scratch" / "unit-vanilla";
  r.out_dir = dir / "scratch" / "unit-rba";
  const auto lv = harness::read_log(harness::train(v).log_path);
  const auto lr = harness::read_log(harness::train(r).log_path);
  for (const char* k : {"loss", "loss_res", "loss_bc", "loss_ic"})
    if (lv.column(k) != lr.column(k)) return false;
  return lv.rows.size() == 11;
}

Outcome rba_algebra(RunStore& store) {
  Outcome o;
  double lo = 1.0, hi = 0.0;
  std::size_t rows = 0;
  for (auto id : {pde::CaseId::AllenCahn, pde::CaseId::Helmholtz}) {
    for (std::uint64_t s : (id == pde::CaseId::AllenCahn ? std::vector<std::uint64_t>{0, 1, 2} : std::vector<std::uint64_t>{0})) {
      const auto& log = store.get(id, true, s);
      for (double v : log.column("lambda_min")) lo = std::min(lo, v);
      for (double v : log.column("lambda_max")) hi = std::max(hi, v);
      rows += log.rows.size();
    }
  }
  const bool bounded = lo >= 0.0 && hi <= 1.0;
  o.notes.push_back("lambda range over " + std::to_string(rows) + " rows: [" + fmt(lo) + ", " + fmt(hi) + "]");

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> mags(1000);
  for (auto& m : mags) m = u(rng) * 10.0;
  auto w = rba::RbaWeights::make(mags.size(), true, 1.0 - 0.001, 0.001, 0.0);
  for (auto& l : w.lambda) l = u(rng);
  const double mx = *std::max_element(mags.begin(), mags.end());
  double step_err = 0.0;
  for (int k = 0; k < 5000; ++k) {
    const auto prev = w.lambda;
    rba::rba_update(w, mags);
    for (std::size_t i = 0; i < mags.size(); ++i) {
      const double target = mags[i] / mx;
      step_err = std::max(step_err, std::abs((w.lambda[i] - target) - w.gamma * (prev[i] - target)));
    }
  }
  const bool decay = step_err < 1e-12;
  o.notes.push_back("frozen residual: worst per-step deviation from gamma^k decay " + fmt(step_err));

  const bool unit = unit_lambda_matches_vanilla(store.dir());
  o.notes.push_back(std::string("unit multipliers vs vanilla over 10 iterations: ") + (unit ? "bit-identical" : "differ"));
  o.pass = bounded && decay && unit;
  o.summary = std::string("lambda in [0,1] ") + (bounded ? "yes" : "no") + ", decay error " + fmt(step_err) +
              " (limit 1e-12), unit path " + (unit ? "bit-identical" : "differs");
  return o;
}

Outcome adam_fixed_points(RunStore& store) {
  Outcome o;
  opt::AdamConfig cfg;
  const int steps = static_cast<int>(std::lround(10.0 / (1.0 - cfg.beta2)));
  double worst = 0.0;
  for (double mag : {1e-3, 1.0, 1e3}) {
    nn::NetworkState net({1, 2, 1});
    auto st = opt::AdamState::zeros(net.num_params(), cfg);
    ad::ParamGradient g;
    g.values.resize(net.num_params());
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = (i % 2 ? -mag : mag) * (1.0 + 0.1 * static_cast<double>(i));
    for (int k = 0; k < steps; ++k) opt::adam_step(st, g, net);
    for (double c : opt::correction(st)) worst = std::max(worst, std::abs(std::abs(c) - 1.0));
  }
  o.notes.push_back("constant gradients of magnitude 1e-3, 1 and 1e3 after " + std::to_string(steps) + " steps");
  double lo = 1.0, hi = 0.0;
  std::size_t rows = 0;
  for (const auto* log : store.all()) {
    for (double v : log->column("srr_c")) {
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++rows;
    }
  }
  const bool bounded = rows > 0 && lo >= 0.0 && hi <= 1.0;
  o.pass = worst < 1e-3 && bounded;
  o.summary = "max ||C|-1| " + fmt(worst) + " (limit 1e-3), srr_c range [" + fmt(lo) + ", " + fmt(hi) + "] over " +
              std::to_string(rows) + " rows";
  return o;
}

struct PhaseVerdict {
  bool signature{false};
  bool aligned{false};
  std::string text;
};

PhaseVerdict judge(const diag::PhaseReport& p, double initial_snr) {
  PhaseVerdict v;
  v.signature = initial_snr > 1.0 && p.fitting_end && p.total_diffusion_onset;
  std::ostringstream os;
  os << "initial snr " << fmt(initial_snr) << ", diffusion from " << fmt_opt(p.fitting_end) << ", total diffusion at "
     << fmt_opt(p.total_diffusion_onset);
  if (p.steepest_l2) {
    const double a = static_cast<double>(p.steepest_l2->first), b = static_cast<double>(p.steepest_l2->second);
    os << ", steepest descent [" << p.steepest_l2->first << ", " << p.steepest_l2->second << "]";
    if (p.total_diffusion_onset) {
      const double t = static_cast<double>(*p.total_diffusion_onset);
      v.aligned = t >= 0.8 * a && t <= 1.2 * b;
    }
  }
  v.text = os.str();
  return v;
}

Outcome phase_structure(RunStore& store) {
  Outcome o;
  bool ok = true;
  std::string verdicts;
  for (bool rba : {false, true}) {
    const std::string mode = rba ? "rba" : "vanilla";
    std::vector<harness::Analysis> runs;
    for (std::uint64_t s : {0, 1, 2}) {
      runs.push_back(harness::analyze(store.get(pde::CaseId::AllenCahn, rba, s)));
      const auto& a = runs.back();
      const auto v = judge(a.phases, a.snr_smoothed.empty() ? 0.0 : a.snr_smoothed.front());
      o.notes.push_back(mode + " seed " + std::to_string(s) + ": " + v.text + (v.signature ? "" : " [no three-phase signature]") +
                        (v.aligned ? "" : " [onset outside +-20% of steepest descent]"));
    }
    std::set<std::size_t> shared(runs[0].diag_iterations.begin(), runs[0].diag_iterations.end());
    for (const auto& a : runs) {
      std::set<std::size_t> s(a.diag_iterations.begin(), a.diag_iterations.end()), keep;
      std::set_intersection(shared.begin(), shared.end(), s.begin(), s.end(), std::inserter(keep, keep.begin()));
      shared = std::move(keep);
    }
    std::vector<std::size_t> iters(shared.begin(), shared.end());
    std::vector<double> snr(iters.size(), 0.0), l2(iters.size(), 0.0);
    for (const auto& a : runs) {
      for (std::size_t k = 0; k < iters.size(); ++k) {
        const auto pos = static_cast<std::size_t>(
            std::lower_bound(a.diag_iterations.begin(), a.diag_iterations.end(), iters[k]) - a.diag_iterations.begin());
        snr[k] += std::log(a.snr_smoothed[pos]) / 3.0;
        l2[k] += std::log(a.rel_l2[pos]) / 3.0;
      }
    }
    for (auto& v : snr) v = std::exp(v);
    for (auto& v : l2) v = std::exp(v);
    const auto p = diag::detect_phases(iters, snr, l2, runs[0].phases.params);
    const auto v = judge(p, snr.empty() ? 0.0 : snr.front());
    o.notes.push_back(mode + " seed average: " + v.text);
    ok = ok && v.signature && v.aligned;
    verdicts += mode + (v.signature ? " three-phase" : " no-signature") + (v.aligned ? "/aligned " : "/misaligned ");
  }
  o.pass = ok;
  o.summary = "seed-averaged allen-cahn: " + verdicts;
  return o;
}

Outcome rba_speedup(RunStore& store) {
  Outcome o;
  bool ok = true;
  for (auto id : {pde::CaseId::AllenCahn, pde::CaseId::Helmholtz}) {
    const auto r = harness::iterations_to(store.get(id, true, 0), 0.10);
    const auto v = harness::iterations_to(store.get(id, false, 0), 0.10);
    const bool pass = r && (!v || 2 * *r <= *v);
    const auto fr = harness::analyze(store.get(id, true, 0)).final_rel_l2;
    const auto fv = harness::analyze(store.get(id, false, 0)).final_rel_l2;
    o.notes.push_back(std::string(pde::case_name(id)) + ": rba " + fmt_opt(r) + ", vanilla " + fmt_opt(v) +
                      " iterations to 0.10; final rel_l2 rba " + (fr ? fmt(*fr) : "none") + ", vanilla " +
                      (fv ? fmt(*fv) : "none"));
    o.summary += std::string(pde::case_name(id)) + (pass ? " ok " : " fail ");
    ok = ok && pass;
  }
  o.pass = ok;
  return o;
}

Outcome homogeneity_order(RunStore& store) {
  Outcome o;
  bool ok = true;
  for (auto id : {pde::CaseId::AllenCahn, pde::CaseId::Helmholtz}) {
    const auto r = harness::analyze(store.get(id, true, 0)).final_homogeneity;
    const auto v = harness::analyze(store.get(id, false, 0)).final_homogeneity;
    const bool pass = r && v && *r < *v;
    o.summary += std::string(pde::case_name(id)) + " rba " + (r ? fmt(*r) : "none") + " vs vanilla " + (v ? fmt(*v) : "none") +
                 (pass ? " ok; " : " fail; ");
    ok = ok && pass;
  }
  o.pass = ok;
  return o;
}

Outcome ib_trajectories(RunStore& store) {
  Outcome o;
  const auto& log = store.get(pde::CaseId::AllenCahn, true, 0);
  const auto a = harness::analyze(log);
  const int hidden = log.hidden_layers();
  const auto cfg = log.config();
  const double cap = std::log2(static_cast<double>(cfg.probe_side) * cfg.probe_side);
  const auto rows = log.rows_with("binfrac_l1");
  auto layer_mean = [&](std::size_t row, const char* prefix) {
    double s = 0.0;
    for (int k = 1; k <= hidden; ++k) s += log.rows[row][log.index_of(prefix + std::to_string(k))];
    return s / hidden;
  };
  double hmax = 0.0;
  for (auto r : rows)
    for (int k = 1; k <= hidden; ++k) hmax = std::max(hmax, log.rows[r][log.index_of("H_l" + std::to_string(k))]);
  const bool capped = hmax <= cap;

  const auto deep = log.index_of("H_l" + std::to_string(hidden));
  double running = 0.0;
  for (auto r : rows) running = std::max(running, log.rows[r][deep]);
  const double drop = rows.empty() || running <= 0.0 ? 1.0 : (running - log.rows[rows.back()][deep]) / running;
  const bool small_drop = drop < 0.15;

  bool rises = false;
  std::string sat = "no total-diffusion onset detected";
  if (const auto onset = a.phases.total_diffusion_onset) {
    double at = std::nan(""), after = 0.0;
    std::size_t n = 0;
    for (auto r : rows) {
      const auto it = static_cast<std::size_t>(log.rows[r][0]);
      if (it == *onset) at = layer_mean(r, "binfrac_l");
      if (it > *onset) after += layer_mean(r, "binfrac_l"), ++n;
    }
    if (n > 0) after /= static_cast<double>(n);
    rises = n > 0 && after > at;
    sat = "binary fraction at onset " + std::to_string(*onset) + ": " + fmt(at) + ", mean after " + fmt(after);
  }
  o.notes.push_back(sat);
  o.pass = rises && capped && small_drop;
  o.summary = std::string("saturation rise ") + (rises ? "yes" : "no") + ", max entropy " + fmt(hmax) + " bits (cap " +
              fmt(cap) + "), deepest-layer entropy drop " + fmt(100.0 * drop) + "% (limit 15%)";
  return o;
}

Outcome correlation(RunStore& store) {
  Outcome o;
  bool ok = true;
  auto one = [&](pde::CaseId id, std::uint64_t s) {
    const auto c = harness::analyze(store.get(id, true, s)).correlation;
    ok = ok && c && *c >= 0.6;
    o.summary += std::string(pde::case_name(id)) + " s" + std::to_string(s) + " " + (c ? fmt(*c) : "absent") + "; ";
  };
  for (std::uint64_t s : {0, 1, 2}) one(pde::CaseId::AllenCahn, s);
  one(pde::CaseId::Helmholtz, 0);
  o.summary += "limit 0.6";
  o.pass = ok;
  return o;
}

std::string log_body(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::string line, out;
  while (std::getline(is, line))
    if (line.empty() || line[0] != '#') out += line + '\n';
  return out;
}

Outcome reproducibility(RunStore& store) {
  Outcome o;
  auto c = store.config(pde::CaseId::AllenCahn, true, 4);
  c.iterations = 300;
  c.out_dir = store.dir() / "scratch" / "repro-a";
  auto d = c;
  d.out_dir = store.dir() / "scratch" / "repro-b";
  fs::remove_all(c.out_dir);
  fs::remove_all(d.out_dir);
  const auto a = log_body(harness::train(c).log_path), b = log_body(harness::train(d).log_path);
  o.pass = !a.empty() && a == b;
  o.summary = "two 300-iteration allen-cahn rba runs: bodies " + std::string(o.pass ? "byte-identical" : "differ") + " (" +
              std::to_string(a.size()) + " bytes)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pinnlab acceptance checks"};
  std::vector<int> selected;
  fs::path runs = "acceptance_runs";
  bool prepare = false;
  app.add_option("--criterion", selected, "criteria to run (default all)")->check(CLI::Range(1, 12));
  app.add_option("--runs", runs, "directory holding the cached desk runs");
  app.add_flag("--prepare", prepare, "only make sure every desk run exists");
  CLI11_PARSE(app, argc, argv);

  RunStore store(runs);
  if (prepare) {
    store.all();
    return 0;
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> table{
      {"gradient-correctness", [] { return gradient_correctness(); }},
      {"jet-correctness", [] { return jet_correctness(); }},
      {"exact-solution-residuals", [] { return exact_residuals(); }},
      {"snr-srr-identity", [&] { return identity(store); }},
      {"rba-algebra", [&] { return rba_algebra(store); }},
      {"adam-fixed-points", [&] { return adam_fixed_points(store); }},
      {"phase-structure", [&] { return phase_structure(store); }},
      {"rba-speedup", [&] { return rba_speedup(store); }},
      {"residual-homogeneity", [&] { return homogeneity_order(store); }},
      {"ib-trajectories", [&] { return ib_trajectories(store); }},
      {"snr-srrc-correlation", [&] { return correlation(store); }},
      {"reproducibility", [&] { return reproducibility(store); }},
  };
  if (selected.empty()) {
    selected.resize(table.size());
    std::iota(selected.begin(), selected.end(), 1);
  }
  bool all = true;
  for (int n : selected) {
    const auto& [name, run] = table[static_cast<std::size_t>(n - 1)];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    std::cout << "criterion " << (n < 10 ? " " : "") << n << "  " << (o.pass ? "PASS" : "FAIL") << "  " << name << ": "
              << o.summary << '\n';
    for (const auto& note : o.notes) std::cout << "      " << note << '\n';
    std::cout.flush();
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
