#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pinnlab/diagnostics.hpp"
#include "pinnlab/errors.hpp"

using namespace pinnlab;
using namespace pinnlab::diag;

namespace {

std::vector<ad::ParamGradient> scalars(std::initializer_list<double> v) {
  std::vector<ad::ParamGradient> g;
  for (double x : v) g.push_back({{x}});
  return g;
}

std::vector<ad::ParamGradient> random_grads(std::mt19937_64& rng, std::size_t B, std::size_t p, double mean_scale) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> mean(p);
  for (auto& m : mean) m = mean_scale * n(rng);
  std::vector<ad::ParamGradient> g(B, ad::ParamGradient{std::vector<double>(p)});
  for (auto& b : g)
    for (std::size_t j = 0; j < p; ++j) b[j] = mean[j] + n(rng);
  return g;
}

}  // namespace

TEST_CASE("batch statistics examples") {
  auto same = batch_grad_stats({{{1.0, -2.0}}, {{1.0, -2.0}}, {{1.0, -2.0}}}, 7);
  CHECK(same.iteration == 7);
  CHECK(same.sigma.isZero());
  CHECK(same.mu[1] == -2.0);
  CHECK(snr(same) == kInf);
  CHECK(srr_b(same) == 1.0);

  auto pm = batch_grad_stats(scalars({1.0, -1.0}));
  CHECK(pm.mu[0] == 0.0);
  CHECK(pm.sigma[0] == 1.0);
  CHECK(pm.rms[0] == 1.0);
  CHECK(snr(pm) == 0.0);
  CHECK(srr_b(pm) == 0.0);

  auto s = batch_grad_stats(scalars({1.0, 2.0, 3.0}));
  CHECK(s.mu[0] == 2.0);
  CHECK(s.sigma[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
  CHECK(s.rms[0] == doctest::Approx(std::sqrt(14.0 / 3.0)).epsilon(1e-15));
  CHECK(snr(s) == doctest::Approx(2.449489742783178).epsilon(1e-14));
  CHECK(srr_b(s) == doctest::Approx(0.9258200997725514).epsilon(1e-14));

  auto zero = batch_grad_stats(scalars({0.0, 0.0}));
  CHECK(snr(zero) == 0.0);
  CHECK(srr_b(zero) == 0.0);
  CHECK_THROWS_AS(batch_grad_stats(scalars({1.0})), InvalidArgument);
  CHECK_THROWS_AS(batch_grad_stats({{{1.0}}, {{1.0, 2.0}}}), ShapeError);
}

TEST_CASE("snr from srr") {
  CHECK(snr_from_srr(std::sqrt(2.0) / 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(snr_from_srr(0.0) == 0.0);
  CHECK(snr_from_srr(0.1) == doctest::Approx(0.10050378152592121).epsilon(1e-14));
  CHECK(snr_from_srr(1.0) == kInf);
  CHECK_THROWS_AS(snr_from_srr(-0.1), InvalidArgument);
}

TEST_CASE("identity and regimes on random statistics") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> scale(-3.0, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = batch_grad_stats(random_grads(rng, 32, 40, std::pow(10.0, scale(rng))));
    const double a = snr(s), r = srr_b(s);
    CHECK(std::abs(a - snr_from_srr(r)) / a < 1e-10);
    CHECK((a > 1.0) == (r > std::sqrt(2.0) / 2.0));
    if (r < 0.1) CHECK(std::abs(a - r) / r < 0.01);
    for (Eigen::Index j = 0; j < s.mu.size(); ++j)
      CHECK(s.rms[j] * s.rms[j] == doctest::Approx(s.mu[j] * s.mu[j] + s.sigma[j] * s.sigma[j]).epsilon(1e-12));
  }
}

TEST_CASE("layer SNR") {
  std::mt19937_64 rng(5);
  nn::NetworkState one({1, 1, 1});
  // Two affine layers: a single-layer comparison needs the flat range to be one layer.
  auto g = random_grads(rng, 8, one.num_params(), 0.5);
  auto s = batch_grad_stats(g);
  auto ls = layer_snr(s, one);
  REQUIRE(ls.size() == 2);
  double mu = 0.0, sg = 0.0;
  for (const auto& n : layer_norms(s, one)) {
    mu += n.mu_sq;
    sg += n.sigma_sq;
  }
  CHECK(mu == doctest::Approx(s.mu.squaredNorm()).epsilon(1e-14));
  CHECK(sg == doctest::Approx(s.sigma.squaredNorm()).epsilon(1e-14));

  // Layer 1 batches agree, layer 2 batches cancel.
  std::vector<ad::ParamGradient> c(2, ad::ParamGradient{std::vector<double>(4)});
  c[0].values = {1.0, 2.0, 1.0, -1.0};
  c[1].values = {1.0, 2.0, -1.0, 1.0};
  auto lc = layer_snr(c, one);
  CHECK(lc[0] == kInf);
  CHECK(lc[1] == 0.0);

  // Equal statistics in both layers.
  std::vector<ad::ParamGradient> e(2, ad::ParamGradient{std::vector<double>(4)});
  e[0].values = {1.0, 3.0, 1.0, 3.0};
  e[1].values = {2.0, 1.0, 2.0, 1.0};
  auto le = layer_snr(e, one);
  CHECK(le[0] == le[1]);
}

TEST_CASE("layer SNR of a single-layer range equals the global SNR") {
  std::mt19937_64 rng(6);
  nn::NetworkState net({3, 4, 2});
  auto g = random_grads(rng, 5, net.num_params(), 1.0);
  // Zero the second layer so the first carries the whole signal and noise.
  for (auto& b : g)
    for (std::size_t j = net.slice(1).begin; j < net.slice(1).end; ++j) b[j] = 0.0;
  CHECK(layer_snr(g, net)[0] == doctest::Approx(snr(batch_grad_stats(g))).epsilon(1e-14));
}

TEST_CASE("moving average") {
  std::vector<double> c(7, 2.5);
  CHECK(sma(c) == c);
  CHECK(sma(std::vector<double>{0.0, 10.0}) == std::vector<double>{0.0, 5.0});
  std::vector<double> ramp;
  for (int i = 1; i <= 20; ++i) ramp.push_back(i);
  CHECK(sma(ramp).back() == 15.5);
  CHECK(sma(std::vector<double>{}).empty());
  CHECK_THROWS_AS(sma(ramp, 0), InvalidArgument);
}

TEST_CASE("residual homogeneity") {
  const std::array<pde::Interval, 2> dom{{{0.0, 1.0}, {-1.0, 1.0}}};
  auto pts = testutil::random_points(2, 4000, 3, 0.0, 1.0);
  pts.row(1) = pts.row(1) * 2.0 - Eigen::RowVectorXd::Ones(pts.cols());
  std::vector<double> uni(4000, 0.7);
  CHECK(residual_homogeneity(pts, uni, dom).value == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> one_cell(4000);
  for (Eigen::Index j = 0; j < pts.cols(); ++j) one_cell[j] = (pts(0, j) < 0.5 && pts(1, j) < 0.0) ? 3.0 : 0.0;
  auto h = residual_homogeneity(pts, one_cell, dom, 2);
  CHECK(h.value == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(h.cells_per_axis == 2);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> r(4000), r2(4000);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = u(rng);
    r2[i] = 17.0 * r[i];
  }
  CHECK(residual_homogeneity(pts, r2, dom).value ==
        doctest::Approx(residual_homogeneity(pts, r, dom).value).epsilon(1e-12));

  Eigen::MatrixXd few(2, 6);
  few << 0.1, 0.2, 0.8, 0.9, 0.3, 0.7, -0.9, -0.8, 0.7, 0.9, 0.5, -0.5;
  auto hf = residual_homogeneity(few, std::vector<double>(6, 1.0), dom, 8);
  CHECK(hf.reduced);
  CHECK(hf.cells_per_axis == 2);
  Eigen::MatrixXd lump(2, 3);
  lump << 0.1, 0.2, 0.3, -0.5, -0.6, -0.7;
  CHECK_THROWS_AS(residual_homogeneity(lump, std::vector<double>(3, 1.0), dom), InvalidArgument);
}

TEST_CASE("phase detection") {
  std::vector<std::size_t> it(500);
  std::vector<double> s(500), l2(500);
  for (std::size_t i = 0; i < 500; ++i) {
    it[i] = i;
    s[i] = i < 100 ? 10.0 : i < 300 ? 0.05 : 0.8;
    l2[i] = i < 300 ? 0.5 : 0.5 * std::exp(-0.01 * static_cast<double>(i - 300));
  }
  auto r = detect_phases(it, s, l2);
  CHECK(r.fitting_end == 100u);
  CHECK(r.total_diffusion_onset == 300u);
  CHECK(!r.late_start);
  CHECK(r.labels[99] == Phase::Fitting);
  CHECK(r.labels[100] == Phase::Diffusion);
  CHECK(r.labels[299] == Phase::Diffusion);
  CHECK(r.labels[300] == Phase::TotalDiffusion);
  REQUIRE(r.steepest_l2);
  CHECK(r.steepest_l2->first >= 300);
  CHECK(r.steepest_l2_slope == doctest::Approx(-0.01));

  std::vector<double> hi(60, 10.0), lo(60, 0.01), flat(60, 0.3);
  std::vector<std::size_t> i60(60);
  for (std::size_t i = 0; i < 60; ++i) i60[i] = 100 * i;
  auto a = detect_phases(i60, hi, flat);
  CHECK(!a.fitting_end);
  CHECK(!a.total_diffusion_onset);
  auto b = detect_phases(i60, lo, flat);
  CHECK(b.fitting_end == 0u);
  CHECK(!b.total_diffusion_onset);
  CHECK(b.labels.front() == Phase::Diffusion);

  // A jump that does not last for the dwell is ignored; a later fall marks the late phase.
  std::vector<double> blip(80, 0.05);
  std::vector<std::size_t> i80(80);
  for (std::size_t i = 0; i < 80; ++i) i80[i] = i;
  blip[0] = 5.0;
  blip[20] = blip[21] = 1.0;
  for (std::size_t i = 40; i < 60; ++i) blip[i] = 0.5;
  auto c = detect_phases(i80, blip, std::vector<double>(80, 1.0));
  CHECK(c.total_diffusion_onset == 40u);
  CHECK(c.late_start == 60u);
  CHECK(c.labels[59] == Phase::TotalDiffusion);
  CHECK(c.labels[60] == Phase::Late);
  CHECK_THROWS_AS(detect_phases(i80, blip, std::vector<double>(3, 1.0)), ShapeError);
}

TEST_CASE("pearson") {
  std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1};
  CHECK(*pearson(a, b) == doctest::Approx(1.0));
  CHECK(*pearson(a, c) == doctest::Approx(-1.0));
  CHECK(!pearson(a, std::vector<double>(4, 1.0)));
  CHECK(!pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
  std::vector<double> d{1, 2, std::nan(""), 3, 4}, e{2, 4, 100, 6, 8};
  CHECK(*pearson(d, e) == doctest::Approx(1.0));
}
