#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "weylspec/numerics/hyperdual.hpp"

namespace weylspec::numerics {

struct QuadratureSpec {
  double abs_tol = 1e-14;
  double rel_tol = 1e-10;
  int max_depth = 40;

  void validate() const;
};

/// Raised when adaptive refinement hits the depth limit before meeting tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double best_estimate, double error_bound)
      : std::runtime_error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double best_estimate_;
  double error_bound_;
};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<WideReal> nodes;
  std::vector<WideReal> weights;
};

GaussRule gauss_legendre_rule(int order);

/// The two rules used by the adaptive integrator: order 7 (estimate) and
/// order 5 (comparison for the error estimate).
const GaussRule& gauss7();
const GaussRule& gauss5();

namespace detail {

template <typename T, std::size_t N>
struct Panel {
  T a;
  T b;
  int depth;
  std::array<T, N> estimate;
  std::array<T, N> error;
};

template <typename T, std::size_t N, typename F>
Panel<T, N> evaluate_panel(F& f, T a, T b, int depth) {
  const GaussRule& hi = gauss7();
  const GaussRule& lo = gauss5();
  const T half = (b - a) / 2;
  const T mid = (a + b) / 2;
  std::array<T, N> acc_hi{};
  std::array<T, N> acc_lo{};
  for (std::size_t i = 0; i < hi.nodes.size(); ++i) {
    const std::array<T, N> v = f(mid + half * static_cast<T>(hi.nodes[i]));
    for (std::size_t c = 0; c < N; ++c) acc_hi[c] += static_cast<T>(hi.weights[i]) * v[c];
  }
  for (std::size_t i = 0; i < lo.nodes.size(); ++i) {
    const std::array<T, N> v = f(mid + half * static_cast<T>(lo.nodes[i]));
    for (std::size_t c = 0; c < N; ++c) acc_lo[c] += static_cast<T>(lo.weights[i]) * v[c];
  }
  Panel<T, N> p{a, b, depth, {}, {}};
  for (std::size_t c = 0; c < N; ++c) {
    p.estimate[c] = half * acc_hi[c];
    p.error[c] = std::abs(half * (acc_hi[c] - acc_lo[c]));
  }
  return p;
}

}  // namespace detail

/// Integrates a vector-valued f over [points.front(), points.back()], starting
/// from the panels delimited by `points` (which must be non-decreasing).
///
/// Each component i meets |I_i - exact| <= max(abs_tol, rel_tol |I_i|) as
/// judged by the order-7 vs order-5 Gauss–Legendre comparison. Panels are
/// bisected when their error exceeds their length share of the tolerance.
template <std::size_t N, typename T, typename F>
std::array<T, N> integrate_n(F&& f, std::span<const T> points, const QuadratureSpec& spec) {
  spec.validate();
  if (points.size() < 2) throw std::invalid_argument("integrate: need at least two points");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i] >= points[i - 1])) {
      throw std::invalid_argument("integrate: integration limits must be non-decreasing");
    }
  }
  const T total_length = points.back() - points.front();
  std::array<T, N> zero{};
  if (total_length == 0) return zero;

  std::vector<detail::Panel<T, N>> panels;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] > points[i - 1]) panels.push_back(detail::evaluate_panel<T, N>(f, points[i - 1], points[i], 0));
  }

  constexpr std::size_t kMaxPanels = std::size_t{1} << 20;
  while (true) {
    std::array<T, N> sum{};
    std::array<T, N> err{};
    for (const auto& p : panels) {
      for (std::size_t c = 0; c < N; ++c) {
        sum[c] += p.estimate[c];
        err[c] += p.error[c];
      }
    }
    std::array<T, N> tol{};
    bool converged = true;
    for (std::size_t c = 0; c < N; ++c) {
      tol[c] = std::max(static_cast<T>(spec.abs_tol), static_cast<T>(spec.rel_tol) * std::abs(sum[c]));
      if (!(err[c] <= tol[c])) converged = false;
    }
    if (converged) return sum;

    std::vector<detail::Panel<T, N>> next;
    next.reserve(panels.size() * 2);
    bool refined = false;
    for (const auto& p : panels) {
      const T share = (p.b - p.a) / total_length;
      bool split = false;
      for (std::size_t c = 0; c < N; ++c) {
        if (p.error[c] > tol[c] * share) split = true;
      }
      if (!split) {
        next.push_back(p);
        continue;
      }
      if (p.depth >= spec.max_depth || next.size() + panels.size() > kMaxPanels) {
        std::size_t worst = 0;
        for (std::size_t c = 1; c < N; ++c) {
          if (err[c] / tol[c] > err[worst] / tol[worst]) worst = c;
        }
        throw QuadratureError("integrate: subdivision depth exhausted before tolerance was met",
                              static_cast<double>(sum[worst]), static_cast<double>(err[worst]));
      }
      const T mid = (p.a + p.b) / 2;
      next.push_back(detail::evaluate_panel<T, N>(f, p.a, mid, p.depth + 1));
      next.push_back(detail::evaluate_panel<T, N>(f, mid, p.b, p.depth + 1));
      refined = true;
    }
    panels = std::move(next);
    if (!refined) {
      // Every panel is within its share, so the sum is within tolerance too;
      // only rounding in the share comparison can land here.
      std::array<T, N> out{};
      for (const auto& p : panels) {
        for (std::size_t c = 0; c < N; ++c) out[c] += p.estimate[c];
      }
      return out;
    }
  }
}

/// Scalar integral of f over [a, b].
template <typename T, typename F>
T integrate(F&& f, T a, T b, const QuadratureSpec& spec) {
  if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
  const std::array<T, 2> pts{a, b};
  auto wrapped = [&f](T x) { return std::array<T, 1>{static_cast<T>(f(x))}; };
  return integrate_n<1, T>(wrapped, std::span<const T>(pts), spec)[0];
}

/// Scalar integral with user breakpoints (e.g. kinks or oscillation nodes).
template <typename T, typename F>
T integrate(F&& f, std::span<const T> points, const QuadratureSpec& spec) {
  auto wrapped = [&f](T x) { return std::array<T, 1>{static_cast<T>(f(x))}; };
  return integrate_n<1, T>(wrapped, points, spec)[0];
}

}  // namespace weylspec::numerics
