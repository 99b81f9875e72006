#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "common/binary_io.hpp"
#include "pinnlab/errors.hpp"
#include "pinnlab/refsol.hpp"
#include "refsol/internal.hpp"

namespace pinnlab::refsol {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Analytic: return "analytic";
    case Provenance::ColeHopf: return "cole-hopf";
    case Provenance::Spectral: return "spectral";
    case Provenance::ExternalFile: return "external-file";
  }
  return "?";
}

double relative_l2(std::span<const double> prediction, const ReferenceGrid& reference) {
  if (prediction.size() != reference.size()) {
    throw ShapeError("prediction has " + std::to_string(prediction.size()) + " values, reference has " +
                     std::to_string(reference.size()));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double e = reference.values[static_cast<Eigen::Index>(i)];
    const double d = prediction[i] - e;
    num += d * d;
    den += e * e;
  }
  if (!(den > 0.0)) throw InvalidReference("reference field has zero norm");
  return std::sqrt(num) / std::sqrt(den);
}

namespace {

void fill_tensor_points(ReferenceGrid& g) {
  const auto n0 = g.axis0.size(), n1 = g.axis1.size();
  g.points.resize(2, static_cast<Eigen::Index>(n0 * n1));
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) g.points.col(static_cast<Eigen::Index>(i * n1 + j)) << g.axis0[i], g.axis1[j];
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

std::vector<double> periodic_axis(int res) {
  std::vector<double> v(static_cast<std::size_t>(res));
  for (int j = 0; j < res; ++j) v[static_cast<std::size_t>(j)] = -1.0 + 2.0 * j / res;
  return v;
}

}  // namespace

namespace detail {

// Axes for cached grids; the layout is implied by the case.
void rebuild_axes(ReferenceGrid& g, std::size_t count) {
  const int res = g.resolution;
  switch (g.case_id) {
    case pde::CaseId::AllenCahn:
      g.axis1 = periodic_axis(res);
      g.axis0 = linspace(0.0, 1.0, static_cast<int>(count / static_cast<std::size_t>(res)));
      g.provenance = Provenance::Spectral;
      break;
    case pde::CaseId::Burgers:
      g.axis1 = linspace(-1.0, 1.0, res);
      g.axis0 = linspace(0.0, 1.0, static_cast<int>(count / static_cast<std::size_t>(res)));
      g.provenance = Provenance::ColeHopf;
      break;
    case pde::CaseId::Helmholtz:
      g.axis0 = linspace(-1.0, 1.0, res);
      g.axis1 = linspace(-1.0, 1.0, res);
      g.provenance = Provenance::Analytic;
      break;
    case pde::CaseId::Cavity: throw InvalidArgument("cavity references are read from centerline files");
  }
  fill_tensor_points(g);
}

}  // namespace detail

ReferenceGrid thin_axis1(const ReferenceGrid& grid, int stride) {
  if (stride < 1 || grid.axis1.empty()) throw InvalidArgument("thinning needs a tensor grid and stride >= 1");
  ReferenceGrid out = grid;
  out.axis1.clear();
  for (std::size_t j = 0; j < grid.axis1.size(); j += static_cast<std::size_t>(stride)) out.axis1.push_back(grid.axis1[j]);
  out.values.resize(static_cast<Eigen::Index>(grid.axis0.size() * out.axis1.size()));
  for (std::size_t i = 0; i < grid.axis0.size(); ++i)
    for (std::size_t j = 0; j < out.axis1.size(); ++j)
      out.values[static_cast<Eigen::Index>(i * out.axis1.size() + j)] = grid.at(i, j * static_cast<std::size_t>(stride));
  fill_tensor_points(out);
  return out;
}

void save_reference(const std::filesystem::path& path, const ReferenceGrid& grid) {
  if (grid.case_id == pde::CaseId::Cavity) throw InvalidArgument("cavity references are not cached");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open reference cache for writing: " + path.string());
  char dt[64];
  const auto r = std::to_chars(dt, dt + sizeof dt, grid.dt);
  os << "case=" << pde::case_name(grid.case_id) << ";res=" << grid.resolution << ";dt=" << std::string(dt, r.ptr)
     << '\n';
  io::write_f64_le(os, std::span<const double>(grid.values.data(), grid.size()));
  if (!os) throw std::runtime_error("failed writing reference cache: " + path.string());
}

ReferenceGrid load_reference(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open reference cache: " + path.string());
  std::string header;
  std::getline(is, header);
  ReferenceGrid g;
  bool have_case = false, have_res = false, have_dt = false;
  std::stringstream fields(header);
  std::string field;
  while (std::getline(fields, field, ';')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("malformed reference header field: " + field, 1);
    const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    try {
      if (key == "case") {
        g.case_id = pde::parse_case(val);
        have_case = true;
      } else if (key == "res") {
        g.resolution = std::stoi(val);
        have_res = true;
      } else if (key == "dt") {
        g.dt = std::stod(val);
        have_dt = true;
      } else {
        throw ParseError("unknown reference header key: " + key, 1);
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("bad value in reference header field: " + field, 1);
    } catch (const std::out_of_range&) {
      throw ParseError("bad value in reference header field: " + field, 1);
    }
  }
  if (!have_case || !have_res || !have_dt) throw ParseError("reference header must carry case, res and dt", 1);
  if (g.resolution <= 0) throw ParseError("reference resolution must be positive", 1);
  std::vector<double> payload;
  if (!io::read_f64_le(is, payload)) throw ParseError("reference payload is truncated", 2);
  const auto res = static_cast<std::size_t>(g.resolution);
  const bool square = g.case_id == pde::CaseId::Helmholtz;
  if (payload.empty() || payload.size() % res != 0 || (square && payload.size() != res * res)) {
    throw ParseError("reference payload size does not match its resolution", 2);
  }
  g.values = Eigen::Map<const Eigen::VectorXd>(payload.data(), static_cast<Eigen::Index>(payload.size()));
  detail::rebuild_axes(g, payload.size());
  return g;
}

namespace {

std::vector<std::pair<double, double>> read_two_columns(const std::filesystem::path& path, std::string_view c0,
                                                        std::string_view c1) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  int i0 = -1, i1 = -1;
  std::size_t ncols = 0;
  std::vector<std::pair<double, double>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t"), e = cell.find_last_not_of(" \t");
      cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (i0 < 0) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k] == c0) i0 = static_cast<int>(k);
        if (cells[k] == c1) i1 = static_cast<int>(k);
      }
      if (i0 < 0 || i1 < 0) {
        throw ParseError(path.filename().string() + ": header must contain columns " + std::string(c0) + "," +
                             std::string(c1),
                         lineno);
      }
      ncols = cells.size();
      continue;
    }
    if (cells.size() != ncols) throw ParseError(path.filename().string() + ": wrong number of columns", lineno);
    auto num = [&](const std::string& s) {
      double v = 0.0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError(path.filename().string() + ": not a finite number: '" + s + "'", lineno);
      }
      return v;
    };
    rows.emplace_back(num(cells[static_cast<std::size_t>(i0)]), num(cells[static_cast<std::size_t>(i1)]));
  }
  if (i0 < 0) throw ParseError(path.filename().string() + ": empty file", lineno);
  if (rows.empty()) throw ParseError(path.filename().string() + ": no data rows", lineno);
  return rows;
}

}  // namespace

ReferenceGrid load_cavity_centerlines(const std::filesystem::path& u_csv, const std::filesystem::path& v_csv) {
  const auto u = read_two_columns(u_csv, "y", "u_centerline");
  const auto v = read_two_columns(v_csv, "x", "v_centerline");
  ReferenceGrid g;
  g.case_id = pde::CaseId::Cavity;
  g.provenance = Provenance::ExternalFile;
  const auto n = static_cast<Eigen::Index>(u.size() + v.size());
  g.points.resize(2, n);
  g.values.resize(n);
  Eigen::Index k = 0;
  for (const auto& [y, val] : u) {
    g.points.col(k) << 0.5, y;
    g.values[k++] = val;
    g.quantity.push_back(Quantity::VelocityU);
  }
  for (const auto& [x, val] : v) {
    g.points.col(k) << x, 0.5;
    g.values[k++] = val;
    g.quantity.push_back(Quantity::VelocityV);
  }
  g.resolution = static_cast<int>(n);
  return g;
}

}  // namespace pinnlab::refsol
