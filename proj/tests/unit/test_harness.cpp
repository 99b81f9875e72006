#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pinnlab/errors.hpp"
#include "pinnlab/harness/analyze.hpp"
#include "pinnlab/harness/train.hpp"
#include "pinnlab/harness/train_log.hpp"

using namespace pinnlab;
using namespace pinnlab::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / "pinnlab_test_harness" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig tiny(pde::CaseId id, const std::string& name) {
  auto c = make_preset(id, "desk");
  c.layers = {2, 12, 12, c.layers.back()};
  c.points = 256;
  c.batches = 8;
  c.iterations = 20;
  c.diag_every = 5;
  c.log_every = 1;
  c.boundary_per_segment = 16;
  c.initial_points = 32;
  c.probe_side = 16;
  c.reference_res = 256;
  c.reference_dt = 1e-3;
  c.eval_slices = 11;
  c.eval_nx = 64;
  c.out_dir = scratch(name);
  return c;
}

std::string body(const fs::path& p) {
  std::ifstream is(p);
  std::string line, out;
  while (std::getline(is, line))
    if (line.empty() || line[0] != '#') out += line + "\n";
  return out;
}

}  // namespace

TEST_CASE("presets") {
  auto d = make_preset(pde::CaseId::AllenCahn, "desk");
  CHECK(d.points == 8192);
  CHECK(d.iterations == 50000);
  CHECK(d.batches == 32);
  CHECK(d.diag_every == 100);
  CHECK(d.detector.jump_factor == 4.0);
  CHECK(d.detector.dwell == 5);
  CHECK(d.adam.lr0 == 1e-3);
  CHECK(d.rba_gamma == 0.999);
  CHECK(d.rba_init == 0.0);
  CHECK(d.probe_side * d.probe_side == 4096);
  CHECK(d.bins == 30);
  auto p = make_preset(pde::CaseId::Burgers, "paper");
  CHECK(p.points == 10000);
  CHECK(p.iterations == 100000);
  CHECK(p.layers == std::vector<int>{2, 64, 64, 64, 64, 1});
  CHECK(make_preset(pde::CaseId::Cavity, "paper").layers.back() == 2);
  CHECK(make_preset(pde::CaseId::AllenCahn, "paper").points == 25600);
  CHECK_THROWS_AS(make_preset(pde::CaseId::AllenCahn, "huge"), InvalidArgument);
  for (auto id : {pde::CaseId::AllenCahn, pde::CaseId::Helmholtz, pde::CaseId::Burgers, pde::CaseId::Cavity}) {
    CHECK_NOTHROW(validate(make_preset(id, "desk")));
    CHECK_NOTHROW(validate(make_preset(id, "paper")));
  }
}

TEST_CASE("config text") {
  auto c = make_preset(pde::CaseId::Helmholtz, "desk");
  apply_config_text(c, "# comment\n\nseed = 12\nrba = true\nlayers = 2, 8, 8, 1\nlr = 5e-4\n");
  CHECK(c.seed == 12);
  CHECK(c.rba);
  CHECK(c.layers == std::vector<int>{2, 8, 8, 1});
  CHECK(c.adam.lr0 == 5e-4);

  try {
    apply_config_text(c, "seed = 1\n\nmystery = 4\n");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("mystery") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_config_text(c, "seed = -1\n"), ParseError);
  CHECK_THROWS_AS(apply_config_text(c, "rba = maybe\n"), ParseError);
  CHECK_THROWS_AS(apply_config_text(c, "just words\n"), ParseError);
  CHECK_THROWS_AS(apply_config_text(c, "case = navier\n"), ParseError);

  // Serialized settings read back to the same configuration.
  auto d = make_preset(pde::CaseId::AllenCahn, "paper");
  d.seed = 77;
  d.rba = true;
  d.adam.eps = 1.25e-7;
  d.out_dir = "/tmp/x y";
  std::string text;
  for (const auto& l : serialize(d)) text += l + "\n";
  RunConfig e;
  apply_config_text(e, text);
  CHECK(serialize(e) == serialize(d));
}

TEST_CASE("validation") {
  auto c = make_preset(pde::CaseId::AllenCahn, "desk");
  c.points = 8000;
  c.batches = 33;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c = make_preset(pde::CaseId::AllenCahn, "desk");
  c.layers = {2, 8, 2};
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c = make_preset(pde::CaseId::AllenCahn, "desk");
  c.batches = 1;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
}

TEST_CASE("log columns and round trip") {
  const auto cols = log_columns(2);
  CHECK(cols.size() == 24);
  CHECK(cols[0] == "iter");
  CHECK(cols[15] == "grad_sigma_norm");
  CHECK(cols[16] == "snr_l1");
  CHECK(cols[17] == "H_l1");
  CHECK(cols[18] == "binfrac_l1");
  CHECK(cols[19] == "pnorm_l1");
  CHECK(cols[23] == "pnorm_l2");

  auto dir = scratch("log");
  auto c = make_preset(pde::CaseId::Helmholtz, "desk");
  c.layers = {2, 4, 4, 1};
  {
    LogWriter w(dir / "log.csv", c);
    std::vector<double> r(24, std::nan(""));
    r[0] = 0;
    r[1] = 0.1;
    r[7] = std::numeric_limits<double>::infinity();
    w.row(r);
    r[0] = 10;
    r[1] = 1.0 / 3.0;
    w.row(r);
    CHECK_THROWS_AS(w.row(std::vector<double>(3)), ShapeError);
  }
  auto log = read_log(dir / "log.csv");
  CHECK(log.header.front() == kVersion);
  CHECK(log.columns == cols);
  REQUIRE(log.rows.size() == 2);
  CHECK(log.rows[1][1] == 1.0 / 3.0);
  CHECK(std::isinf(log.rows[0][7]));
  CHECK(std::isnan(log.rows[0][2]));
  CHECK(serialize(log.config()) == serialize(c));
  CHECK(log.rows_with("snr") == std::vector<std::size_t>{0, 1});
  CHECK(log.hidden_layers() == 2);

  std::ofstream(dir / "bad.csv") << "# x = 1\niter,loss\n0,1\n1,abc\n";
  try {
    read_log(dir / "bad.csv");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  std::ofstream(dir / "short.csv") << "iter,loss\n0,1\n1\n";
  CHECK_THROWS_AS(read_log(dir / "short.csv"), ParseError);
  std::ofstream(dir / "order.csv") << "iter,loss\n5,1\n5,2\n";
  CHECK_THROWS_AS(read_log(dir / "order.csv"), ParseError);
}

TEST_CASE("zero budget writes the initial row only") {
  auto c = tiny(pde::CaseId::Helmholtz, "zero");
  c.iterations = 0;
  auto r = train(c);
  CHECK(!r.diverged);
  auto log = read_log(r.log_path);
  REQUIRE(log.rows.size() == 1);
  CHECK(log.rows[0][0] == 0.0);
  CHECK(!std::isnan(log.rows[0][log.index_of("snr")]));
  CHECK(fs::exists(c.out_dir / "checkpoint_0.bin"));
  CHECK(fs::exists(c.out_dir / "residuals_0.csv"));
}

TEST_CASE("vanilla runs keep lambda at one") {
  auto c = tiny(pde::CaseId::Helmholtz, "vanilla");
  auto log = read_log(train(c).log_path);
  for (const char* k : {"lambda_mean", "lambda_min", "lambda_max"})
    for (double v : log.column(k)) CHECK(v == 1.0);
  CHECK(log.rows.size() == 21);
  auto ck = nn::load_checkpoint(c.out_dir / "checkpoint_20.bin");
  CHECK(ck.iteration == 20);
}

TEST_CASE("smoke run reduces the loss") {
  auto c = tiny(pde::CaseId::AllenCahn, "smoke");
  c.layers = {2, 16, 16, 1};
  c.points = 512;
  c.iterations = 200;
  c.diag_every = 50;
  auto log = read_log(train(c).log_path);
  const auto loss = log.column("loss");
  CHECK(loss.back() < loss.front());
  for (double v : log.column("rel_l2")) CHECK(std::isfinite(v));
}

TEST_CASE("identical configurations give identical logs") {
  auto a = tiny(pde::CaseId::Burgers, "repro_a");
  a.rba = true;
  auto b = a;
  b.out_dir = scratch("repro_b");
  const auto la = train(a).log_path, lb = train(b).log_path;
  CHECK(body(la) == body(lb));
  auto other = a;
  other.seed = 1;
  other.out_dir = scratch("repro_c");
  CHECK(body(train(other).log_path) != body(la));
}

TEST_CASE("unit multipliers reproduce the vanilla loss") {
  auto v = tiny(pde::CaseId::AllenCahn, "unit_v");
  v.iterations = 10;
  auto r = v;
  r.out_dir = scratch("unit_r");
  r.rba = true;
  r.rba_gamma = 1.0;
  r.rba_eta = 0.0;
  r.rba_init = 1.0;
  const auto lv = read_log(train(v).log_path), lr = read_log(train(r).log_path);
  for (const char* k : {"loss", "loss_res", "loss_bc", "loss_ic", "rel_l2"}) CHECK(lv.column(k) == lr.column(k));
}

TEST_CASE("cavity runs without reference data leave rel_l2 empty") {
  auto c = tiny(pde::CaseId::Cavity, "cavity");
  c.iterations = 3;
  auto log = read_log(train(c).log_path);
  for (double v : log.column("rel_l2")) CHECK(std::isnan(v));
  for (double v : log.column("loss")) CHECK(std::isfinite(v));
}

TEST_CASE("divergence leaves a flagged partial log") {
  auto c = tiny(pde::CaseId::Helmholtz, "diverge");
  c.adam.lr0 = 1e300;
  c.iterations = 50;
  auto r = train(c);
  CHECK(r.diverged);
  auto log = read_log(r.log_path);
  CHECK(log.diverged);
  CHECK(!log.rows.empty());
  CHECK(log.rows.size() < 51);
}

namespace {

fs::path write_fixture(const fs::path& dir, const std::vector<double>& snr, bool constant = false) {
  auto c = make_preset(pde::CaseId::Helmholtz, "desk");
  c.layers = {2, 4, 1};
  c.detector.window = 1;
  const auto path = dir / "train_log.csv";
  LogWriter w(path, c);
  for (std::size_t i = 0; i < snr.size(); ++i) {
    std::vector<double> r(w.width(), std::nan(""));
    r[0] = static_cast<double>(100 * i);
    r[1] = 1.0;
    r[5] = constant ? 0.5 : (i < 300 ? 0.9 : 0.9 * std::exp(-0.02 * static_cast<double>(i - 300)));
    r[7] = snr[i];
    r[8] = snr[i] / std::sqrt(1.0 + snr[i] * snr[i]);
    r[9] = constant ? 0.5 : std::min(1.0, snr[i]);
    w.row(r);
  }
  return path;
}

}  // namespace

TEST_CASE("analysis of a constructed three-phase log") {
  std::vector<double> snr;
  for (int i = 0; i < 500; ++i) snr.push_back(i < 100 ? 10.0 : i < 300 ? 0.05 : 0.8);
  auto dir = scratch("fixture");
  const auto path = write_fixture(dir, snr);
  const auto a = analyze(read_log(path));
  CHECK(a.phases.fitting_end == 10000u);
  CHECK(a.phases.total_diffusion_onset == 30000u);
  CHECK(a.iterations_to_10pct == 30000u + 100u * 110u);
  CHECK(a.identity.rows == 500);
  CHECK(a.identity.identity_failures == 0);
  CHECK(a.identity.threshold_failures == 0);
  CHECK(a.identity.small_rows == 200);
  CHECK(a.identity.small_failures == 0);
  REQUIRE(a.correlation);
  CHECK(*a.correlation > 0.9);

  const auto again = analyze(read_log(path));
  CHECK(analysis_text(a) == analysis_text(again));
  CHECK(analysis_json(a) == analysis_json(again));
  CHECK(analysis_json(a).find("\"total_diffusion_onset\": 30000") != std::string::npos);

  write_report(path, dir / "report");
  for (const char* f : {"analysis.csv", "convergence.csv", "snr.csv", "layers.csv", "noise.csv", "lambda.csv",
                        "phases.csv", "summary.csv", "residuals.csv"})
    CHECK(fs::exists(dir / "report" / f));
  std::ifstream ph(dir / "report" / "phases.csv");
  std::stringstream ss;
  ss << ph.rdbuf();
  CHECK(ss.str() == "phase,start,end\nfitting,0,9900\ndiffusion,10000,29900\ntotal-diffusion,30000,49900\n");
}

TEST_CASE("constant columns give an absent correlation") {
  auto dir = scratch("constant");
  const auto a = analyze(read_log(write_fixture(dir, std::vector<double>(50, 2.0), true)));
  CHECK(!a.correlation);
  CHECK(analysis_text(a).find("absent") != std::string::npos);
  CHECK(!a.phases.fitting_end);
}
