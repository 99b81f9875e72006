#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "pinnlab/errors.hpp"
#include "pinnlab/refsol.hpp"
#include "refsol/internal.hpp"

namespace pinnlab::refsol {
namespace {

using cplx = std::complex<double>;

// Real-to-complex transform pair on a fixed length. FFTW_ESTIMATE keeps plan
// selection, and hence the rounding, independent of timing.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n), real_(static_cast<std::size_t>(n)), spec_(static_cast<std::size_t>(n / 2 + 1)) {
    fwd_ = fftw_plan_dft_r2c_1d(n, real_.data(), reinterpret_cast<fftw_complex*>(spec_.data()), FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spec_.data()), real_.data(), FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw NumericalFailure("FFTW planning failed");
  }
  ~RealFft() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void forward(const std::vector<double>& in, std::vector<cplx>& out) {
    real_ = in;
    fftw_execute(fwd_);
    out = spec_;
  }
  void inverse(const std::vector<cplx>& in, std::vector<double>& out) {
    spec_ = in;
    fftw_execute(inv_);
    out.resize(real_.size());
    for (std::size_t j = 0; j < real_.size(); ++j) out[j] = real_[j] / n_;
  }

 private:
  int n_;
  std::vector<double> real_;
  std::vector<cplx> spec_;
  fftw_plan fwd_{};
  fftw_plan inv_{};
};

}  // namespace

ReferenceGrid allen_cahn_spectral(int resolution, double dt, SpectralOptions opt) {
  if (resolution < 256 || (resolution & (resolution - 1)) != 0) {
    throw InvalidArgument("spectral resolution must be a power of two >= 256");
  }
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (opt.slices < 2) throw InvalidArgument("need at least two output slices");
  const double interval = 1.0 / (opt.slices - 1);
  const long steps = std::lround(interval / dt);
  if (steps < 1 || std::abs(steps * dt - interval) > 1e-9 * interval) {
    throw InvalidArgument("time step must divide the slice interval " + std::to_string(interval));
  }

  const int n = resolution;
  const std::size_t nk = static_cast<std::size_t>(n / 2 + 1);
  const double pi = std::numbers::pi;

  // Linear part -eps k^2 handled exactly; phi-functions by contour averages.
  std::vector<double> E(nk), E2(nk), Q(nk), f1(nk), f2(nk), f3(nk);
  const int M = opt.contour_points;
  for (std::size_t m = 0; m < nk; ++m) {
    const double k = pi * static_cast<double>(m);
    const double L = -opt.epsilon * k * k;
    E[m] = std::exp(dt * L);
    E2[m] = std::exp(dt * L / 2.0);
    cplx q{}, a{}, b{}, c{};
    for (int j = 1; j <= M; ++j) {
      const cplx r = std::exp(cplx(0.0, pi * (j - 0.5) / M));
      const cplx z = dt * L + r;
      const cplx ez = std::exp(z);
      const cplx z3 = z * z * z;
      q += (std::exp(z / 2.0) - 1.0) / z;
      a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
      b += (2.0 + z + ez * (-2.0 + z)) / z3;
      c += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
    }
    Q[m] = dt * (q / static_cast<double>(M)).real();
    f1[m] = dt * (a / static_cast<double>(M)).real();
    f2[m] = dt * (b / static_cast<double>(M)).real();
    f3[m] = dt * (c / static_cast<double>(M)).real();
  }

  ReferenceGrid g;
  g.case_id = pde::CaseId::AllenCahn;
  g.resolution = n;
  g.dt = dt;
  const std::size_t count = static_cast<std::size_t>(opt.slices) * static_cast<std::size_t>(n);
  g.values.resize(static_cast<Eigen::Index>(count));
  detail::rebuild_axes(g, count);

  std::vector<double> u(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double x = g.axis1[static_cast<std::size_t>(j)];
    u[static_cast<std::size_t>(j)] = x * x * std::cos(pi * x);
    g.values[j] = u[static_cast<std::size_t>(j)];
  }

  RealFft fft(n);
  std::vector<cplx> v, Nv, Na, Nb, Nc, ah(nk), bh(nk), ch(nk);
  std::vector<double> phys, work(static_cast<std::size_t>(n));
  auto nonlinear = [&](const std::vector<double>& w, std::vector<cplx>& out) {
    for (std::size_t j = 0; j < w.size(); ++j) work[j] = 5.0 * w[j] - 5.0 * w[j] * w[j] * w[j];
    fft.forward(work, out);
  };

  fft.forward(u, v);
  for (int s = 1; s < opt.slices; ++s) {
    for (long step = 0; step < steps; ++step) {
      fft.inverse(v, phys);
      nonlinear(phys, Nv);
      for (std::size_t m = 0; m < nk; ++m) ah[m] = E2[m] * v[m] + Q[m] * Nv[m];
      fft.inverse(ah, phys);
      nonlinear(phys, Na);
      for (std::size_t m = 0; m < nk; ++m) bh[m] = E2[m] * v[m] + Q[m] * Na[m];
      fft.inverse(bh, phys);
      nonlinear(phys, Nb);
      for (std::size_t m = 0; m < nk; ++m) ch[m] = E2[m] * ah[m] + Q[m] * (2.0 * Nb[m] - Nv[m]);
      fft.inverse(ch, phys);
      nonlinear(phys, Nc);
      for (std::size_t m = 0; m < nk; ++m) {
        v[m] = E[m] * v[m] + Nv[m] * f1[m] + 2.0 * (Na[m] + Nb[m]) * f2[m] + Nc[m] * f3[m];
      }
    }
    fft.inverse(v, phys);
    for (int j = 0; j < n; ++j) {
      const double val = phys[static_cast<std::size_t>(j)];
      if (!std::isfinite(val)) {
        throw NumericalFailure("spectral Allen-Cahn state became non-finite before t=" +
                               std::to_string(g.axis0[static_cast<std::size_t>(s)]));
      }
      g.values[static_cast<Eigen::Index>(s) * n + j] = val;
    }
  }
  return g;
}

}  // namespace pinnlab::refsol
