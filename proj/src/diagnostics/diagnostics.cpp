#include "pinnlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "pinnlab/errors.hpp"

namespace pinnlab::diag {

GradStats batch_grad_stats(const std::vector<ad::ParamGradient>& batch_grads, std::size_t iteration) {
  if (batch_grads.size() < 2) throw InvalidArgument("batch statistics need at least two batches");
  const std::size_t p = batch_grads.front().size();
  for (const auto& g : batch_grads) {
    if (g.size() != p) throw ShapeError("batch gradients differ in length");
  }
  const double B = static_cast<double>(batch_grads.size());
  GradStats s;
  s.batches = batch_grads.size();
  s.iteration = iteration;
  s.mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  s.sigma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  s.rms = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (const auto& g : batch_grads) {
    for (std::size_t j = 0; j < p; ++j) {
      s.mu[static_cast<Eigen::Index>(j)] += g[j];
      s.rms[static_cast<Eigen::Index>(j)] += g[j] * g[j];
    }
  }
  s.mu /= B;
  for (const auto& g : batch_grads) {
    for (std::size_t j = 0; j < p; ++j) {
      const double d = g[j] - s.mu[static_cast<Eigen::Index>(j)];
      s.sigma[static_cast<Eigen::Index>(j)] += d * d;
    }
  }
  s.sigma = (s.sigma / B).cwiseSqrt();
  s.rms = (s.rms / B).cwiseSqrt();
  return s;
}

namespace {

double ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
  return num / den;
}

}  // namespace

double snr(const GradStats& s) { return ratio(s.mu.norm(), s.sigma.norm()); }

double srr_b(const GradStats& s) {
  const double num = s.mu.norm(), den = s.rms.norm();
  if (den == 0.0) return 0.0;
  return std::min(1.0, num / den);
}

double snr_from_srr(double srr) {
  if (srr < 0.0) throw InvalidArgument("SRR must be non-negative");
  if (srr >= 1.0) return kInf;
  return srr / std::sqrt((1.0 - srr) * (1.0 + srr));
}

std::vector<LayerNorms> layer_norms(const GradStats& s, const nn::NetworkState& net) {
  if (static_cast<std::size_t>(s.mu.size()) != net.num_params()) {
    throw ShapeError("gradient statistics do not match the network");
  }
  std::vector<LayerNorms> out;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& sl = net.slice(l);
    const auto b = static_cast<Eigen::Index>(sl.begin), n = static_cast<Eigen::Index>(sl.end - sl.begin);
    out.push_back({s.mu.segment(b, n).squaredNorm(), s.sigma.segment(b, n).squaredNorm()});
  }
  return out;
}

std::vector<double> layer_snr(const GradStats& s, const nn::NetworkState& net) {
  std::vector<double> out;
  for (const auto& n : layer_norms(s, net)) out.push_back(ratio(std::sqrt(n.mu_sq), std::sqrt(n.sigma_sq)));
  return out;
}

std::vector<double> layer_snr(const std::vector<ad::ParamGradient>& batch_grads, const nn::NetworkState& net) {
  return layer_snr(batch_grad_stats(batch_grads), net);
}

std::vector<double> sma(std::span<const double> series, std::size_t window) {
  if (window < 1) throw InvalidArgument("SMA window must be at least 1");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += series[j];
    out[i] = sum / static_cast<double>(i + 1 - lo);
  }
  return out;
}

Homogeneity residual_homogeneity(const Eigen::MatrixXd& points, std::span<const double> magnitudes,
                                 std::span<const pde::Interval> domain, int cells) {
  const auto dim = static_cast<int>(points.rows());
  if (static_cast<std::size_t>(points.cols()) != magnitudes.size()) {
    throw ShapeError("one residual magnitude per point is required");
  }
  if (domain.size() != static_cast<std::size_t>(dim)) throw ShapeError("domain does not match point dimension");
  auto total_cells = [dim](int c) {
    int t = 1;
    for (int d = 0; d < dim; ++d) t *= c;
    return t;
  };
  if (cells < 1 || total_cells(cells) < 4) throw InvalidArgument("homogeneity needs at least four cells");
  Homogeneity h;
  for (int c = cells; total_cells(c) >= 4; --c) {
    const int nc = total_cells(c);
    std::vector<double> sum(static_cast<std::size_t>(nc), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(nc), 0);
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      int cell = 0;
      for (int d = 0; d < dim; ++d) {
        const auto& iv = domain[static_cast<std::size_t>(d)];
        int k = static_cast<int>(std::floor((points(d, j) - iv.lo) / iv.width() * c));
        k = std::clamp(k, 0, c - 1);
        cell = cell * c + k;
      }
      sum[static_cast<std::size_t>(cell)] += std::abs(magnitudes[static_cast<std::size_t>(j)]);
      ++count[static_cast<std::size_t>(cell)];
    }
    if (std::find(count.begin(), count.end(), 0u) != count.end()) {
      h.reduced = true;
      continue;
    }
    double mean = 0.0;
    for (int i = 0; i < nc; ++i) {
      sum[static_cast<std::size_t>(i)] /= static_cast<double>(count[static_cast<std::size_t>(i)]);
      mean += sum[static_cast<std::size_t>(i)];
    }
    mean /= nc;
    double var = 0.0;
    for (double v : sum) var += (v - mean) * (v - mean);
    var /= nc;
    h.cells_per_axis = c;
    h.value = mean == 0.0 ? 0.0 : std::sqrt(var) / mean;
    return h;
  }
  throw InvalidArgument("too few points to fill four homogeneity cells");
}

std::string phase_name(Phase p) {
  switch (p) {
    case Phase::Fitting: return "fitting";
    case Phase::Diffusion: return "diffusion";
    case Phase::TotalDiffusion: return "total-diffusion";
    case Phase::Late: return "late";
  }
  return "unknown";
}

PhaseReport detect_phases(std::span<const std::size_t> iterations, std::span<const double> snr_smoothed,
                          std::span<const double> l2, DetectorParams params) {
  const std::size_t n = iterations.size();
  if (snr_smoothed.size() != n || l2.size() != n) throw ShapeError("phase series must be aligned");
  if (params.jump_factor <= 1.0 || params.dwell < 1 || params.window < 1) {
    throw InvalidArgument("detector needs jump_factor > 1, dwell >= 1 and window >= 1");
  }
  PhaseReport r;
  r.params = params;
  r.iterations.assign(iterations.begin(), iterations.end());
  r.labels.assign(n, Phase::Fitting);

  std::size_t d = 0;
  while (d < n && snr_smoothed[d] > 1.0) ++d;
  if (d < n) {
    r.fitting_end = iterations[d];
    double running_min = kInf;
    std::optional<std::size_t> onset;
    double level = 0.0;
    for (std::size_t i = d; i < n && !onset; ++i) {
      running_min = std::min(running_min, snr_smoothed[i]);
      const double thr = params.jump_factor * running_min;
      if (running_min > 0.0 && snr_smoothed[i] >= thr && i + params.dwell <= n) {
        bool held = true;
        for (std::size_t k = i; k < i + params.dwell; ++k) held = held && snr_smoothed[k] >= thr;
        if (held) {
          onset = i;
          level = thr;
        }
      }
    }
    std::optional<std::size_t> late;
    if (onset) {
      for (std::size_t i = *onset + params.dwell; i + params.dwell <= n && !late; ++i) {
        bool below = true;
        for (std::size_t k = i; k < i + params.dwell; ++k) below = below && snr_smoothed[k] < level;
        if (below) late = i;
      }
    }
    for (std::size_t i = d; i < n; ++i) {
      r.labels[i] = late && i >= *late ? Phase::Late
                    : onset && i >= *onset ? Phase::TotalDiffusion
                                           : Phase::Diffusion;
    }
    if (onset) r.total_diffusion_onset = iterations[*onset];
    if (late) r.late_start = iterations[*late];
  }

  std::vector<std::size_t> valid;
  std::vector<double> logs;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(l2[i]) && l2[i] > 0.0) {
      valid.push_back(i);
      logs.push_back(std::log(l2[i]));
    }
  }
  if (valid.size() >= 2) {
    const std::size_t w = std::min(params.window, valid.size() - 1);
    double best = kInf;
    for (std::size_t i = 0; i + w < valid.size(); ++i) {
      const double span = static_cast<double>(iterations[valid[i + w]]) - static_cast<double>(iterations[valid[i]]);
      if (span <= 0.0) continue;
      const double slope = (logs[i + w] - logs[i]) / span;
      if (slope < best) {
        best = slope;
        r.steepest_l2 = std::make_pair(iterations[valid[i]], iterations[valid[i + w]]);
      }
    }
    if (r.steepest_l2) r.steepest_l2_slope = best;
  }
  return r;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("correlated series must have equal length");
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isfinite(a[i]) && std::isfinite(b[i])) pairs.emplace_back(a[i], b[i]);
  }
  if (pairs.size() < 3) return std::nullopt;
  const auto constant = [&](auto get) {
    return std::all_of(pairs.begin(), pairs.end(), [&](const auto& q) { return get(q) == get(pairs.front()); });
  };
  if (constant([](const auto& q) { return q.first; }) || constant([](const auto& q) { return q.second; })) {
    return std::nullopt;
  }
  double ma = 0.0, mb = 0.0;
  for (auto [x, y] : pairs) {
    ma += x;
    mb += y;
  }
  ma /= static_cast<double>(pairs.size());
  mb /= static_cast<double>(pairs.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (auto [x, y] : pairs) {
    sab += (x - ma) * (y - mb);
    saa += (x - ma) * (x - ma);
    sbb += (y - mb) * (y - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace pinnlab::diag
