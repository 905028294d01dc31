#include "weylspec/numerics/tridiagonal.hpp"

#include <algorithm>
#include <limits>

namespace weylspec::numerics {

void TridiagSystem::validate() const {
  if (diagonal.empty()) throw std::invalid_argument("TridiagSystem: empty matrix");
  if (off_diagonal.size() + 1 != diagonal.size()) {
    throw std::invalid_argument("TridiagSystem: off-diagonal must have length dim - 1");
  }
}

std::size_t sturm_count(const TridiagSystem& system, double x) {
  const std::size_t n = system.dimension();
  double scale = 0;
  for (double d : system.diagonal) scale = std::max(scale, std::abs(d));
  for (double e : system.off_diagonal) scale = std::max(scale, std::abs(e));
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, scale * scale);
  std::size_t negatives = 0;
  double d = system.diagonal[0] - x;
  if (std::abs(d) < pivmin) d = -pivmin;
  if (d < 0) ++negatives;
  for (std::size_t i = 1; i < n; ++i) {
    const double e = system.off_diagonal[i - 1];
    d = (system.diagonal[i] - x) - e * e / d;
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0) ++negatives;
  }
  return negatives;
}

std::vector<double> smallest_eigenvalues(const TridiagSystem& system, std::size_t count) {
  system.validate();
  const std::size_t n = system.dimension();
  if (count > n) throw std::invalid_argument("smallest_eigenvalues: count exceeds dimension");

  // Gershgorin enclosure of the whole spectrum.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0;
    if (i > 0) radius += std::abs(system.off_diagonal[i - 1]);
    if (i + 1 < n) radius += std::abs(system.off_diagonal[i]);
    lo = std::min(lo, system.diagonal[i] - radius);
    hi = std::max(hi, system.diagonal[i] + radius);
  }
  const double span = std::max(std::abs(lo), std::abs(hi));
  lo -= 1e-12 * span + 1e-300;
  hi += 1e-12 * span + 1e-300;

  std::vector<double> eigenvalues(count);
  double floor = lo;
  for (std::size_t j = 0; j < count; ++j) {
    // Smallest x with sturm_count(x) > j lies in (left, right].
    double left = floor;
    double right = hi;
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (left + right);
      if (mid <= left || mid >= right) break;
      if (sturm_count(system, mid) > j) {
        right = mid;
      } else {
        left = mid;
      }
      const double width = right - left;
      if (width <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(left), std::abs(right))) break;
    }
    eigenvalues[j] = 0.5 * (left + right);
    floor = left;
  }
  return eigenvalues;
}

}  // namespace weylspec::numerics
