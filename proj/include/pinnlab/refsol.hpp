#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "pinnlab/autodiff/jet.hpp"
#include "pinnlab/pde.hpp"

namespace pinnlab::refsol {

enum class Provenance { Analytic, ColeHopf, Spectral, ExternalFile };
std::string_view provenance_name(Provenance p);

/// What a reference value measures at its point.
enum class Quantity { Value, VelocityU, VelocityV };

/// Reference values u_e at a set of points. Tensor grids keep their axes
/// (points enumerate axis0 slowest); scattered data leaves them empty.
struct ReferenceGrid {
  pde::CaseId case_id{pde::CaseId::Helmholtz};
  Provenance provenance{Provenance::Analytic};
  int resolution{0};
  double dt{0.0};
  std::vector<double> axis0;
  std::vector<double> axis1;
  Eigen::MatrixXd points;  // input_dim x n
  Eigen::VectorXd values;
  std::vector<Quantity> quantity;  // empty means every entry is Quantity::Value

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  bool uniform_quantity() const { return quantity.empty(); }
  /// Value at (axis0[i], axis1[j]) of a tensor grid.
  double at(std::size_t i, std::size_t j) const {
    return values[static_cast<Eigen::Index>(i * axis1.size() + j)];
  }
};

/// ||f - u_e||_2 / ||u_e||_2. Throws ShapeError on length mismatch and
/// InvalidReference when the reference norm is zero.
double relative_l2(std::span<const double> prediction, const ReferenceGrid& reference);

// Helmholtz

double helmholtz_exact(double x, double y, double a1 = 6.0, double a2 = 6.0);
ad::Jet helmholtz_exact_jet(double x, double y, int order, double a1 = 6.0, double a2 = 6.0);
/// res x res grid over [-1, 1]^2 including the boundary.
ReferenceGrid helmholtz_grid(int res, double a1 = 6.0, double a2 = 6.0);

// Burgers via Cole-Hopf

/// Gauss-Hermite nodes and log-weights for weight exp(-z^2).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> log_weights;
};
const GaussHermite& gauss_hermite(int n);

/// Cole-Hopf integral with exactly `nodes` quadrature nodes (jets in (t, x)).
ad::Jet burgers_cole_hopf_fixed(double t, double x, int nodes, int order, double nu);

/// Doubles the node count from `nodes` until value and derivatives change by
/// less than 1e-8 (relative to max(1, |entry|)). Throws NumericalFailure past
/// `node_cap`.
ad::Jet burgers_cole_hopf_jet(double t, double x, int order, double nu = 1.0 / (100.0 * 3.14159265358979323846),
                              int nodes = 64, int node_cap = 8192);
double burgers_cole_hopf(double t, double x, int nodes = 64, double nu = 1.0 / (100.0 * 3.14159265358979323846),
                         int node_cap = 8192);

/// nt time slices over [0, 1] by nx points over [-1, 1] (endpoints included).
ReferenceGrid burgers_grid(int nt, int nx, double nu = 1.0 / (100.0 * 3.14159265358979323846));

// Allen-Cahn via Fourier collocation and ETDRK4

struct SpectralOptions {
  double epsilon{1e-4};
  int slices{51};          // output times, evenly spaced over [0, 1]
  int contour_points{64};  // for the phi-function contour integrals
};

/// Periodic grid x_j = -1 + 2j/res. Throws InvalidArgument unless res is a
/// power of two >= 256 and dt divides the slice interval; NumericalFailure on a
/// non-finite state.
ReferenceGrid allen_cahn_spectral(int resolution, double dt, SpectralOptions options = {});

/// Keep every `stride`-th node along axis1.
ReferenceGrid thin_axis1(const ReferenceGrid& grid, int stride);

// Cavity

/// Centerline data: u(0.5, y) from `y,u_centerline` and v(x, 0.5) from
/// `x,v_centerline`. Throws ParseError with the offending line number.
ReferenceGrid load_cavity_centerlines(const std::filesystem::path& u_csv, const std::filesystem::path& v_csv);

// Cache

/// Header `case=<id>;res=<n>;dt=<float>` then the values as little-endian
/// float64 in row-major order.
void save_reference(const std::filesystem::path& path, const ReferenceGrid& grid);
ReferenceGrid load_reference(const std::filesystem::path& path);

}  // namespace pinnlab::refsol
