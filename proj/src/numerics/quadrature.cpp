#include "weylspec/numerics/quadrature.hpp"

#include <numbers>

namespace weylspec::numerics {

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0) || !(rel_tol > 0)) {
    throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
  }
  if (max_depth < 1) throw std::invalid_argument("QuadratureSpec: max_depth must be >= 1");
}

GaussRule gauss_legendre_rule(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre_rule: order must be >= 1");
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const WideReal pi = std::numbers::pi_v<WideReal>;
  for (int i = 0; i < order; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    WideReal x = std::cos(pi * (i + 0.75L) / (order + 0.5L));
    WideReal dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      WideReal p0 = 1;
      WideReal p1 = x;
      for (int k = 2; k <= order; ++k) {
        const WideReal pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (order == 1) p0 = 1;
      dp = order * (x * p1 - p0) / (x * x - 1);
      const WideReal dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    // Recompute the derivative at the converged node.
    WideReal p0 = 1;
    WideReal p1 = x;
    for (int k = 2; k <= order; ++k) {
      const WideReal pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    if (order == 1) p0 = 1;
    dp = order * (x * p1 - p0) / (x * x - 1);
    rule.nodes[i] = x;
    rule.weights[i] = 2 / ((1 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& gauss7() {
  static const GaussRule rule = gauss_legendre_rule(7);
  return rule;
}

const GaussRule& gauss5() {
  static const GaussRule rule = gauss_legendre_rule(5);
  return rule;
}

}  // namespace weylspec::numerics
