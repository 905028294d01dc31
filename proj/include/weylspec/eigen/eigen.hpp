#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "weylspec/warp/model.hpp"

namespace weylspec::eigen {

using warp::ManifoldModel;

struct EigenReport {
  std::string kind;  ///< "radial" or "surface"
  std::string model_label;
  double R = 0;            ///< truncation radius
  double r_start = 0;      ///< inner end of the radial interval
  double h = 0;            ///< radial mesh size
  double h_theta = 0;      ///< angular mesh size (surface only)
  double theta_max = 0;    ///< angular half-width (surface only)
  std::string boundary;    ///< e.g. "dirichlet" or "regular-dirichlet"
  std::vector<double> eigenvalues;  ///< ascending
  double predicted_bottom = 0;      ///< (n-1)^2 c^2 / 4
};

enum class InnerBoundary { automatic, dirichlet, regular };

struct RadialOptions {
  std::optional<double> r_start;  ///< defaults to the model's r_min
  InnerBoundary inner = InnerBoundary::automatic;  ///< automatic: regular when r_start = 0 and psi(0) = 0
  double c = 0;                   ///< for the predicted bottom only
};

/// Eigenvalues of -(psi^{n-1} u')' / psi^{n-1} on [r_start, R], Dirichlet at R.
/// Requires a warp independent of s; h must divide R - r_start.
EigenReport radial_eigs(const ManifoldModel& model, double R, double h, std::size_t count,
                        const RadialOptions& options = {});

/// Raised when the requested surface mesh exceeds the nonzero budget.
class MeshTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SurfaceOptions {
  std::optional<double> r_start;  ///< defaults to the model's r_min
  double c = 0;
  std::size_t max_nonzeros = 4'000'000;
  double tol = 1e-9;  ///< relative accuracy of the returned eigenvalues
};

/// Dirichlet eigenvalues of the Laplace-Beltrami operator of dr^2 + psi(r, theta)^2 dtheta^2
/// on [r_start, R] x [-theta_max, theta_max]. The five-point divergence-form
/// stencil is symmetrized with the square root of the weight psi and solved by
/// shift-invert Lanczos. Requires n = 2; h_r and h_theta must divide the side lengths.
EigenReport surface_eigs(const ManifoldModel& model, double R, double h_r, double h_theta, double theta_max,
                         std::size_t count, const SurfaceOptions& options = {});

struct BottomTrend {
  double estimate;  ///< intercept of the least-squares fit lambda_1 = a + b / R^2
  double slope;     ///< b
  bool monotone;    ///< lambda_1 non-increasing in R
};

/// Extrapolates the lowest eigenvalue to R = infinity. Requires at least three
/// reports with strictly increasing R.
BottomTrend bottom_trend(const std::vector<EigenReport>& reports);

}  // namespace weylspec::eigen
