#include "weylspec/eigen/eigen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "weylspec/numerics/lanczos.hpp"
#include "weylspec/numerics/sampled_function.hpp"
#include "weylspec/numerics/tridiagonal.hpp"

namespace weylspec::eigen {

using numerics::WideReal;

namespace {

std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::size_t cells_of(double length, double h, const char* what) {
  if (!(h > 0)) throw std::invalid_argument(std::string(what) + ": mesh size must be > 0");
  const double cells = length / h;
  const auto n = static_cast<std::size_t>(std::llround(cells));
  if (n < 2 || std::abs(cells - static_cast<double>(n)) > 1e-8 * cells) {
    throw std::invalid_argument(std::string(what) + ": mesh size " + num(h) + " must divide the length " +
                                num(length) + " into at least two cells");
  }
  return n;
}

double bottom(const ManifoldModel& model, double c) { return (model.n - 1) * (model.n - 1) * c * c / 4; }

}  // namespace

EigenReport radial_eigs(const ManifoldModel& model, double R, double h, std::size_t count,
                        const RadialOptions& options) {
  if (model.warp.depends_on_s()) {
    throw std::invalid_argument("radial_eigs: warp of '" + model.label + "' depends on s; use surface_eigs");
  }
  const double a = options.r_start.value_or(model.r_min);
  if (!(a >= 0) || !(R > a)) throw std::invalid_argument("radial_eigs: requires 0 <= r_start < R");
  const std::size_t n_cells = cells_of(R - a, h, "radial_eigs");

  numerics::LeftBoundary left = numerics::LeftBoundary::dirichlet;
  const bool degenerate = a == 0 && model.psi(0, 0) == 0;
  if (options.inner == InnerBoundary::regular ||
      (options.inner == InnerBoundary::automatic && degenerate)) {
    left = numerics::LeftBoundary::regular;
  }
  if (left == numerics::LeftBoundary::dirichlet && degenerate) {
    throw std::invalid_argument("radial_eigs: psi vanishes at r = 0; use the regular inner boundary");
  }

  // Quarter-step samples cover the nodes, the flux midpoints and the Simpson half cell.
  const std::size_t samples = 4 * n_cells;
  std::vector<WideReal> grid(samples + 1), pw(samples + 1), zero(samples + 1, 0);
  for (std::size_t i = 0; i <= samples; ++i) {
    grid[i] = static_cast<WideReal>(a) + static_cast<WideReal>(h) * static_cast<WideReal>(i) / 4;
    pw[i] = std::pow(model.psi(grid[i], 0), model.n - 1);
    if (!std::isfinite(pw[i])) throw std::range_error("radial_eigs: psi^{n-1} overflows at r = " + num(double(grid[i])));
  }
  grid.back() = static_cast<WideReal>(R);
  const numerics::SampledFunction<WideReal> p(grid, pw, numerics::Interpolation::linear);
  const numerics::SampledFunction<WideReal> q(grid, zero, numerics::Interpolation::linear);

  EigenReport rep;
  rep.kind = "radial";
  rep.model_label = model.label;
  rep.R = R;
  rep.r_start = a;
  rep.h = h;
  rep.boundary = left == numerics::LeftBoundary::regular ? "regular-dirichlet" : "dirichlet-dirichlet";
  rep.eigenvalues = numerics::sturm_liouville_eigs<WideReal>(p, q, p, a, R, h, count, left);
  rep.predicted_bottom = bottom(model, options.c);
  return rep;
}

EigenReport surface_eigs(const ManifoldModel& model, double R, double h_r, double h_theta, double theta_max,
                         std::size_t count, const SurfaceOptions& options) {
  if (model.n != 2) throw std::invalid_argument("surface_eigs: requires n = 2, got " + std::to_string(model.n));
  const double a = options.r_start.value_or(model.r_min);
  if (!(a >= 0) || !(R > a)) throw std::invalid_argument("surface_eigs: requires 0 <= r_start < R");
  if (!(theta_max > 0)) throw std::invalid_argument("surface_eigs: theta_max must be > 0");
  if (count < 1) throw std::invalid_argument("surface_eigs: count must be >= 1");
  const std::size_t nr = cells_of(R - a, h_r, "surface_eigs (r)");
  const std::size_t nt = cells_of(2 * theta_max, h_theta, "surface_eigs (theta)");
  const std::size_t ir = nr - 1, it = nt - 1;  // interior nodes
  const std::size_t dim = ir * it;
  const std::size_t nonzeros = 5 * dim;
  if (nonzeros > options.max_nonzeros) {
    const double f = std::sqrt(static_cast<double>(nonzeros) / static_cast<double>(options.max_nonzeros));
    throw MeshTooLarge("surface_eigs: mesh of " + std::to_string(ir) + " x " + std::to_string(it) +
                       " interior nodes needs about " + std::to_string(nonzeros) + " nonzeros (cap " +
                       std::to_string(options.max_nonzeros) + "); try h_r = " + num(h_r * f * 1.01) +
                       ", h_theta = " + num(h_theta * f * 1.01) + " or coarser");
  }
  if (count > dim) throw std::invalid_argument("surface_eigs: count exceeds the number of interior nodes");

  const WideReal ha = h_r, hb = h_theta;
  auto r_at = [&](double i) { return static_cast<WideReal>(a) + ha * static_cast<WideReal>(i); };
  auto t_at = [&](double j) { return -static_cast<WideReal>(theta_max) + hb * static_cast<WideReal>(j); };
  auto index = [&](std::size_t i, std::size_t j) { return (i - 1) * it + (j - 1); };
  auto positive = [&](WideReal v, WideReal r, WideReal t) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw std::domain_error("surface_eigs: psi must be positive and finite, got " + num(double(v)) + " at r = " +
                              num(double(r)) + ", theta = " + num(double(t)));
    }
    return v;
  };

  std::vector<WideReal> sqrt_w(dim);
  for (std::size_t i = 1; i <= ir; ++i) {
    for (std::size_t j = 1; j <= it; ++j) {
      const WideReal r = r_at(double(i)), t = t_at(double(j));
      sqrt_w[index(i, j)] = std::sqrt(positive(model.psi(r, t), r, t));
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nonzeros);
  for (std::size_t i = 1; i <= ir; ++i) {
    for (std::size_t j = 1; j <= it; ++j) {
      const std::size_t me = index(i, j);
      const WideReal r = r_at(double(i)), t = t_at(double(j));
      const WideReal pr_hi = positive(model.psi(r_at(i + 0.5), t), r_at(i + 0.5), t) / (ha * ha);
      const WideReal pr_lo = positive(model.psi(r_at(i - 0.5), t), r_at(i - 0.5), t) / (ha * ha);
      const WideReal pt_hi = 1 / (positive(model.psi(r, t_at(j + 0.5)), r, t_at(j + 0.5)) * hb * hb);
      const WideReal pt_lo = 1 / (positive(model.psi(r, t_at(j - 0.5)), r, t_at(j - 0.5)) * hb * hb);
      const WideReal sw = sqrt_w[me];
      trip.emplace_back(me, me, static_cast<double>((pr_hi + pr_lo + pt_hi + pt_lo) / (sw * sw)));
      // Upper and lower neighbours both appear so the full matrix is assembled.
      if (i < ir) trip.emplace_back(me, index(i + 1, j), static_cast<double>(-pr_hi / (sw * sqrt_w[index(i + 1, j)])));
      if (i > 1) trip.emplace_back(me, index(i - 1, j), static_cast<double>(-pr_lo / (sw * sqrt_w[index(i - 1, j)])));
      if (j < it) trip.emplace_back(me, index(i, j + 1), static_cast<double>(-pt_hi / (sw * sqrt_w[index(i, j + 1)])));
      if (j > 1) trip.emplace_back(me, index(i, j - 1), static_cast<double>(-pt_lo / (sw * sqrt_w[index(i, j - 1)])));
    }
  }
  for (const auto& t : trip) {
    if (!std::isfinite(t.value())) throw std::range_error("surface_eigs: matrix entry overflows double range");
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  A.setFromTriplets(trip.begin(), trip.end());

  // Shift-invert at zero: the operator is positive definite with Dirichlet data.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("surface_eigs: sparse factorization failed");
  Eigen::VectorXd rhs(dim), sol(dim);
  auto inverse = [&](std::span<const double> x, std::span<double> y) {
    for (std::size_t k = 0; k < dim; ++k) rhs[static_cast<Eigen::Index>(k)] = x[k];
    sol = ldlt.solve(rhs);
    for (std::size_t k = 0; k < dim; ++k) y[k] = -sol[static_cast<Eigen::Index>(k)];
  };

  // Scale of A^{-1} from a few power steps, to set an absolute Lanczos tolerance.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(dim);
  for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = gauss(rng);
  double mu_max = 0;
  for (int step = 0; step < 8; ++step) {
    x.normalize();
    x = ldlt.solve(x);
    mu_max = x.norm();
  }

  const auto pairs = numerics::lanczos_smallest(dim, inverse, count, options.tol * mu_max);
  EigenReport rep;
  rep.kind = "surface";
  rep.model_label = model.label;
  rep.R = R;
  rep.r_start = a;
  rep.h = h_r;
  rep.h_theta = h_theta;
  rep.theta_max = theta_max;
  rep.boundary = "dirichlet";
  for (const auto& p : pairs) rep.eigenvalues.push_back(-1 / p.value);
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
  rep.predicted_bottom = bottom(model, options.c);
  return rep;
}

BottomTrend bottom_trend(const std::vector<EigenReport>& reports) {
  if (reports.size() < 3) throw std::invalid_argument("bottom_trend: needs at least three reports");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].eigenvalues.empty()) throw std::invalid_argument("bottom_trend: report without eigenvalues");
    if (i > 0 && !(reports[i].R > reports[i - 1].R)) {
      throw std::invalid_argument("bottom_trend: truncation radii must increase");
    }
  }
  // Least squares for lambda_1 = a + b x with x = 1 / R^2.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(reports.size());
  bool monotone = true;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const double xi = 1 / (reports[i].R * reports[i].R);
    const double yi = reports[i].eigenvalues.front();
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
    if (i > 0) {
      const double prev = reports[i - 1].eigenvalues.front();
      if (yi > prev + 1e-12 * std::abs(prev)) monotone = false;
    }
  }
  const double det = m * sxx - sx * sx;
  const double b = (m * sxy - sx * sy) / det;
  const double a = (sy - b * sx) / m;
  return {a, b, monotone};
}

}  // namespace weylspec::eigen
