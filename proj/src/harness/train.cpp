#include "pinnlab/harness/train.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "pinnlab/autodiff/kernel.hpp"
#include "pinnlab/diagnostics.hpp"
#include "pinnlab/errors.hpp"
#include "pinnlab/harness/train_log.hpp"
#include "pinnlab/ib.hpp"
#include "pinnlab/optimizer.hpp"
#include "pinnlab/rba.hpp"

namespace pinnlab::harness {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

refsol::ReferenceGrid allen_cahn_reference(const RunConfig& c) {
  const fs::path dir = c.reference_cache.empty() ? c.out_dir : c.reference_cache;
  const fs::path file = dir / ("reference_allen-cahn_" + std::to_string(c.reference_res) + ".bin");
  refsol::ReferenceGrid full;
  bool have = false;
  if (fs::exists(file)) {
    try {
      full = refsol::load_reference(file);
      have = full.resolution == c.reference_res && full.dt == c.reference_dt &&
             full.axis0.size() == static_cast<std::size_t>(c.eval_slices);
    } catch (const std::exception&) {
      have = false;
    }
  }
  if (!have) {
    refsol::SpectralOptions opt;
    opt.slices = c.eval_slices;
    full = refsol::allen_cahn_spectral(c.reference_res, c.reference_dt, opt);
    fs::create_directories(dir);
    refsol::save_reference(file, full);
  }
  if (c.eval_nx <= 0 || c.reference_res % c.eval_nx != 0) {
    throw InvalidArgument("eval_nx must divide reference_res");
  }
  return refsol::thin_axis1(full, c.reference_res / c.eval_nx);
}

void write_residuals(const fs::path& path, const pde::BenchmarkSpec& spec, const Eigen::MatrixXd& points,
                     std::span<const double> magnitude, std::span<const double> lambda) {
  std::ofstream os(path);
  os << spec.axis_names[0] << ',' << spec.axis_names[1] << ",abs_residual,lambda\n";
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    os << format_cell(points(0, j)) << ',' << format_cell(points(1, j)) << ',' << format_cell(magnitude[i]) << ','
       << format_cell(lambda[i]) << '\n';
  }
}

}  // namespace

std::optional<refsol::ReferenceGrid> load_case_reference(const RunConfig& c) {
  const auto spec = pde::benchmark(c.case_id);
  switch (c.case_id) {
    case pde::CaseId::AllenCahn: return allen_cahn_reference(c);
    case pde::CaseId::Helmholtz: return refsol::helmholtz_grid(c.eval_nx / 2, spec.a1, spec.a2);
    case pde::CaseId::Burgers: return refsol::burgers_grid(c.eval_slices, c.eval_nx, spec.nu);
    case pde::CaseId::Cavity:
      if (c.cavity_u_csv.empty() || c.cavity_v_csv.empty()) return std::nullopt;
      return refsol::load_cavity_centerlines(c.cavity_u_csv, c.cavity_v_csv);
  }
  return std::nullopt;
}

std::vector<double> predict_on(const nn::NetworkState& net, const refsol::ReferenceGrid& ref, const RunConfig& c) {
  ad::KernelOptions ko{c.block_size, c.threads};
  std::vector<double> out(ref.size());
  if (ref.uniform_quantity()) {
    const Eigen::MatrixXd y = ad::forward_values(net, ref.points, ko);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = y(0, static_cast<Eigen::Index>(i));
    return out;
  }
  const auto jets = ad::forward_stencil(net, ref.points, ad::Stencil::full(2, 1), 0, ko);
  for (std::size_t i = 0; i < out.size(); ++i) {
    switch (ref.quantity[i]) {
      case refsol::Quantity::Value: out[i] = jets[i].value(); break;
      case refsol::Quantity::VelocityU: out[i] = jets[i].d(1); break;
      case refsol::Quantity::VelocityV: out[i] = -jets[i].d(0); break;
    }
  }
  return out;
}

TrainResult train(const RunConfig& c, std::ostream* progress) {
  validate(c);
  fs::create_directories(c.out_dir);
  const auto spec = pde::benchmark(c.case_id);
  const auto set = pde::sample_collocation(
      spec, c.seed, c.points,
      {static_cast<std::size_t>(c.boundary_per_segment), static_cast<std::size_t>(c.initial_points)});
  ad::LossEvaluator evaluator(pde::assemble_loss(spec, set, c.batches), {c.block_size, c.threads});
  const Eigen::MatrixXd& residual_points = evaluator.spec().residual.points;
  const auto reference = load_case_reference(c);
  const Eigen::MatrixXd probes = ib::probe_grid(spec.domain[0].lo, spec.domain[0].hi, spec.domain[1].lo,
                                                spec.domain[1].hi, c.probe_side);

  TrainResult result;
  result.log_path = c.out_dir / "train_log.csv";
  result.net = nn::init(c.layers, c.seed);
  nn::NetworkState& net = result.net;
  auto adam = opt::AdamState::zeros(net.num_params(), c.adam);
  auto weights = rba::RbaWeights::make(evaluator.spec().num_residual_terms(), c.rba, c.rba_gamma, c.rba_eta,
                                       c.rba_init);
  LogWriter log(result.log_path, c);
  const std::size_t hidden = net.num_hidden();
  const auto& base = base_columns();
  auto col = [&](const char* name) {
    for (std::size_t i = 0; i < base.size(); ++i)
      if (base[i] == name) return i;
    throw std::logic_error("missing base column");
  };
  const std::size_t progress_every = std::max<std::size_t>(1, c.iterations / 50);

  std::size_t t = 0;
  try {
    for (t = 0; t <= c.iterations; ++t) {
      const auto& residuals = evaluator.forward(net);
      rba::rba_update(weights, residuals.magnitude);
      const bool diag = t % c.diag_every == 0 || t == c.iterations;
      const bool logged = diag || t % c.log_every == 0;
      auto step = evaluator.backward(weights.lambda, diag);

      std::vector<double> row(log.width(), kNaN);
      if (logged) {
        row[col("iter")] = static_cast<double>(t);
        row[col("loss")] = step.loss.total;
        row[col("loss_res")] = step.loss.residual;
        row[col("loss_bc")] = step.loss.boundary;
        row[col("loss_ic")] = step.loss.initial;
        if (reference) row[col("rel_l2")] = refsol::relative_l2(predict_on(net, *reference, c), *reference);
        const auto ls = rba::lambda_stats(weights.lambda);
        row[col("lambda_mean")] = ls.mean;
        row[col("lambda_min")] = ls.min;
        row[col("lambda_max")] = ls.max;
      }
      if (diag) {
        const auto stats = diag::batch_grad_stats(step.batch_grads, t);
        row[col("snr")] = diag::snr(stats);
        row[col("srr_b")] = diag::srr_b(stats);
        row[col("grad_mu_norm")] = stats.mu_norm();
        row[col("grad_sigma_norm")] = stats.sigma_norm();
        const auto h = diag::residual_homogeneity(residual_points, residuals.magnitude, spec.domain, c.homog_cells);
        row[col("homog")] = h.value;
        const auto lsnr = diag::layer_snr(stats, net);
        const auto rec = ib::ib_record(net, probes, t, c.bins, c.saturation_delta);
        for (std::size_t k = 0; k < hidden; ++k) {
          row[base.size() + 4 * k + 0] = lsnr[k];
          row[base.size() + 4 * k + 1] = rec.entropy[k];
          row[base.size() + 4 * k + 2] = rec.binary_fraction[k];
          row[base.size() + 4 * k + 3] = rec.param_norm[k];
        }
      }
      const bool snapshot = t % c.checkpoint_every == 0 || t == c.iterations;
      if (snapshot) {
        const auto tag = std::to_string(t);
        nn::save_checkpoint(c.out_dir / ("checkpoint_" + tag + ".bin"), net, c.seed, t);
        write_residuals(c.out_dir / ("residuals_" + tag + ".csv"), spec, residual_points, residuals.magnitude,
                        weights.lambda);
      }

      double lr = opt::learning_rate(c.adam, static_cast<double>(adam.t));
      if (t < c.iterations) lr = opt::adam_step(adam, step.grad, net);
      if (logged) {
        row[col("lr")] = lr;
        row[col("srr_c")] = opt::srr_c(adam);
        log.row(row);
      }
      if (progress && (t % progress_every == 0 || t == c.iterations)) {
        *progress << "iter " << t << "  loss " << format_cell(step.loss.total);
        if (logged && reference) *progress << "  rel_l2 " << format_cell(row[col("rel_l2")]);
        *progress << '\n';
      }
      result.last_iteration = t;
    }
  } catch (const DivergedTraining& e) {
    log.comment("diverged=true iter=" + std::to_string(t) + " index=" + std::to_string(e.point_index()));
    result.diverged = true;
    result.last_iteration = t;
    if (progress) *progress << "diverged at iteration " << t << ": " << e.what() << '\n';
  }
  return result;
}

}  // namespace pinnlab::harness
