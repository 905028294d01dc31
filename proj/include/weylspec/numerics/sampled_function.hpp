#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "weylspec/numerics/quadrature.hpp"

namespace weylspec::numerics {

enum class Interpolation { linear, cubic };

/// A function tabulated on a strictly increasing grid.
///
/// Cubic interpolation is piecewise Hermite: slopes are either supplied (e.g.
/// the exact derivative of a cumulative integral) or estimated from the
/// three-point parabola through neighbouring samples. Grid points reproduce the
/// stored values exactly, and evaluation outside [front, back] throws.
template <typename T>
class SampledFunction {
 public:
  SampledFunction(std::vector<T> grid, std::vector<T> values, Interpolation order)
      : grid_(std::move(grid)), values_(std::move(values)), order_(order) {
    check_shape();
    if (order_ == Interpolation::cubic) slopes_ = estimate_slopes();
  }

  SampledFunction(std::vector<T> grid, std::vector<T> values, std::vector<T> slopes)
      : grid_(std::move(grid)), values_(std::move(values)), slopes_(std::move(slopes)),
        order_(Interpolation::cubic) {
    check_shape();
    if (slopes_.size() != grid_.size()) {
      throw std::invalid_argument("SampledFunction: slopes must match grid length");
    }
  }

  T operator()(T x) const {
    const std::size_t i = locate(x);
    if (x == grid_[i]) return values_[i];
    if (x == grid_[i + 1]) return values_[i + 1];
    const T h = grid_[i + 1] - grid_[i];
    const T t = (x - grid_[i]) / h;
    if (order_ == Interpolation::linear) return values_[i] + t * (values_[i + 1] - values_[i]);
    const T t2 = t * t;
    const T t3 = t2 * t;
    const T h00 = 2 * t3 - 3 * t2 + 1;
    const T h10 = t3 - 2 * t2 + t;
    const T h01 = -2 * t3 + 3 * t2;
    const T h11 = t3 - t2;
    return h00 * values_[i] + h10 * h * slopes_[i] + h01 * values_[i + 1] + h11 * h * slopes_[i + 1];
  }

  T derivative(T x) const {
    const std::size_t i = locate(x);
    const T h = grid_[i + 1] - grid_[i];
    if (order_ == Interpolation::linear) return (values_[i + 1] - values_[i]) / h;
    const T t = (x - grid_[i]) / h;
    const T t2 = t * t;
    const T d00 = 6 * t2 - 6 * t;
    const T d10 = 3 * t2 - 4 * t + 1;
    const T d01 = -6 * t2 + 6 * t;
    const T d11 = 3 * t2 - 2 * t;
    return (d00 * values_[i] + d01 * values_[i + 1]) / h + d10 * slopes_[i] + d11 * slopes_[i + 1];
  }

  T front() const { return grid_.front(); }
  T back() const { return grid_.back(); }
  bool contains(T x) const { return x >= grid_.front() && x <= grid_.back(); }
  std::span<const T> grid() const { return grid_; }
  std::span<const T> values() const { return values_; }
  std::span<const T> slopes() const { return slopes_; }
  Interpolation order() const { return order_; }

 private:
  void check_shape() const {
    if (grid_.size() < 2) throw std::invalid_argument("SampledFunction: need at least two samples");
    if (grid_.size() != values_.size()) {
      throw std::invalid_argument("SampledFunction: grid and values differ in length");
    }
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      if (!(grid_[i] > grid_[i - 1])) {
        throw std::invalid_argument("SampledFunction: grid must be strictly increasing");
      }
    }
  }

  std::size_t locate(T x) const {
    if (!(x >= grid_.front() && x <= grid_.back())) {
      throw std::out_of_range("SampledFunction: evaluation point outside the sampled range");
    }
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    if (i == 0) i = 1;
    if (i >= grid_.size()) i = grid_.size() - 1;
    return i - 1;
  }

  std::vector<T> estimate_slopes() const {
    const std::size_t n = grid_.size();
    std::vector<T> m(n);
    if (n == 2) {
      m[0] = m[1] = (values_[1] - values_[0]) / (grid_[1] - grid_[0]);
      return m;
    }
    // Derivative of the interpolating parabola through three consecutive samples.
    auto parabola_slope = [&](std::size_t j0, std::size_t at) {
      const T x0 = grid_[j0], x1 = grid_[j0 + 1], x2 = grid_[j0 + 2];
      const T y0 = values_[j0], y1 = values_[j0 + 1], y2 = values_[j0 + 2];
      const T x = grid_[at];
      return y0 * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2)) +
             y1 * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2)) +
             y2 * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    };
    m[0] = parabola_slope(0, 0);
    for (std::size_t i = 1; i + 1 < n; ++i) m[i] = parabola_slope(i - 1, i);
    m[n - 1] = parabola_slope(n - 3, n - 1);
    return m;
  }

  std::vector<T> grid_;
  std::vector<T> values_;
  std::vector<T> slopes_;
  Interpolation order_;
};

/// V(r) = integral of f from 0 to r, tabulated on `steps` equal panels of
/// [r0, r1] with exact slopes V' = f at the nodes.
///
/// f must be positive at every node so that V is strictly increasing.
template <typename T, typename F>
SampledFunction<T> cumulative_integral(F&& f, T r0, T r1, int steps, const QuadratureSpec& quad = {}) {
  if (steps < 2) throw std::invalid_argument("cumulative_integral: steps must be >= 2");
  if (!(r0 >= 0) || !(r1 > r0)) throw std::invalid_argument("cumulative_integral: requires 0 <= r0 < r1");
  std::vector<T> grid(steps + 1);
  std::vector<T> values(steps + 1);
  std::vector<T> slopes(steps + 1);
  const T h = (r1 - r0) / steps;
  for (int i = 0; i <= steps; ++i) grid[i] = i == steps ? r1 : r0 + h * i;
  values[0] = r0 > 0 ? integrate<T>(f, T{0}, r0, quad) : T{0};
  for (int i = 0; i <= steps; ++i) {
    slopes[i] = static_cast<T>(f(grid[i]));
    if (!(slopes[i] > 0)) {
      throw std::domain_error("cumulative_integral: integrand must be positive at r = " +
                              std::to_string(static_cast<double>(grid[i])));
    }
    if (i > 0) {
      values[i] = values[i - 1] + integrate<T>(f, grid[i - 1], grid[i], quad);
      if (!(values[i] > values[i - 1])) {
        throw std::domain_error("cumulative_integral: tabulated integral is not strictly increasing");
      }
    }
  }
  return SampledFunction<T>(std::move(grid), std::move(values), std::move(slopes));
}

}  // namespace weylspec::numerics
