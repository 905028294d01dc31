#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "weylspec/numerics/sampled_function.hpp"

namespace weylspec::numerics {

/// Symmetric tridiagonal matrix: diagonal (length n) and off-diagonal (n-1).
struct TridiagSystem {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;

  std::size_t dimension() const { return diagonal.size(); }
  void validate() const;
};

/// Number of eigenvalues strictly below x (Sturm sequence / LDL^T inertia).
std::size_t sturm_count(const TridiagSystem& system, double x);

/// The `count` smallest eigenvalues, ascending, by bisection on Sturm counts.
std::vector<double> smallest_eigenvalues(const TridiagSystem& system, std::size_t count);

enum class LeftBoundary {
  dirichlet,  ///< u(a) = 0
  regular,    ///< zero flux at a, for a degenerate weight p(a) = 0 (polar origin)
};

/// Assembles the symmetric tridiagonal form of -(p u')'/w + q u = lambda u on
/// [a, b] with node spacing h and Dirichlet at b.
///
/// Fluxes use p at cell midpoints; the generalized problem K u = lambda M u is
/// symmetrized with the similarity transform M^{-1/2} K M^{-1/2}. Arithmetic is
/// done in T so that exponentially large weights stay representable.
template <typename T>
TridiagSystem sturm_liouville_system(const SampledFunction<T>& p, const SampledFunction<T>& q,
                                     const SampledFunction<T>& w, double a, double b, double h,
                                     LeftBoundary left = LeftBoundary::dirichlet) {
  if (!(b > a) || !(h > 0)) throw std::invalid_argument("sturm_liouville: requires a < b and h > 0");
  const double cells = (b - a) / h;
  const auto n = static_cast<std::size_t>(std::llround(cells));
  if (n < 2 || std::abs(cells - static_cast<double>(n)) > 1e-8 * cells) {
    throw std::invalid_argument("sturm_liouville: h must divide the interval length");
  }
  const T th = static_cast<T>(h);
  auto node = [&](double i) { return static_cast<T>(a + i * h); };

  const std::size_t first = left == LeftBoundary::dirichlet ? 1 : 0;
  const std::size_t dim = n - first;
  std::vector<T> k_diag(dim), k_off(dim > 0 ? dim - 1 : 0), mass(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const std::size_t i = idx + first;
    const T p_right = p(node(static_cast<double>(i) + 0.5));
    if (!(p_right > 0)) throw std::domain_error("sturm_liouville: p must be positive");
    T flux = p_right / th;
    T m;
    if (i == 0) {
      // Half cell [a, a + h/2] by Simpson's rule; no flux through x = a.
      const T w0 = w(node(0.0));
      const T w1 = w(node(0.25));
      const T w2 = w(node(0.5));
      m = th / 12 * (w0 + 4 * w1 + w2);
    } else {
      const T p_left = p(node(static_cast<double>(i) - 0.5));
      if (!(p_left > 0)) throw std::domain_error("sturm_liouville: p must be positive");
      flux += p_left / th;
      m = w(node(static_cast<double>(i))) * th;
    }
    if (!(m > 0)) throw std::domain_error("sturm_liouville: weight must be positive");
    mass[idx] = m;
    k_diag[idx] = flux + q(node(static_cast<double>(i))) * m;
    if (idx + 1 < dim) k_off[idx] = -p_right / th;
  }

  TridiagSystem out;
  out.diagonal.resize(dim);
  out.off_diagonal.resize(dim - 1);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    out.diagonal[idx] = static_cast<double>(k_diag[idx] / mass[idx]);
    if (idx + 1 < dim) {
      out.off_diagonal[idx] =
          static_cast<double>(k_off[idx] / (std::sqrt(mass[idx]) * std::sqrt(mass[idx + 1])));
    }
  }
  return out;
}

/// The `count` smallest eigenvalues of -(p u')'/w + q u = lambda u on [a, b].
template <typename T>
std::vector<double> sturm_liouville_eigs(const SampledFunction<T>& p, const SampledFunction<T>& q,
                                         const SampledFunction<T>& w, double a, double b, double h,
                                         std::size_t count, LeftBoundary left = LeftBoundary::dirichlet) {
  if (count < 1) throw std::invalid_argument("sturm_liouville_eigs: count must be >= 1");
  const TridiagSystem system = sturm_liouville_system(p, q, w, a, b, h, left);
  if (count > system.dimension()) {
    throw std::invalid_argument("sturm_liouville_eigs: count " + std::to_string(count) +
                                " exceeds matrix dimension " + std::to_string(system.dimension()));
  }
  return smallest_eigenvalues(system, count);
}

}  // namespace weylspec::numerics
