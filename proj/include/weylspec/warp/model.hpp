#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "weylspec/warp/expr.hpp"

namespace weylspec::warp {

/// The set C_a(N) = {(r, s) : s < c2 e^{-a r}}; a = 0 is the cone C_0(N).
struct Neighborhood {
  double a = 0;
  double c2 = 1;
};

/// Warped product dr^2 + psi(r, s)^2 g_{S^{n-1}}, where s is the angular
/// distance to a fixed direction N.
struct ManifoldModel {
  int n = 2;
  WarpExpr warp;
  Neighborhood neighborhood;
  double r_min = 0.1;
  std::string label;

  /// Angular radius of the neighborhood at r, capped at pi.
  numerics::WideReal s_max(numerics::WideReal r) const;

  WarpJet jet(numerics::WideReal r, numerics::WideReal s) const { return eval_warp(warp, r, s); }
  numerics::WideReal psi(numerics::WideReal r, numerics::WideReal s) const { return eval_value(warp, r, s); }

  /// Checks the scalar invariants and samples psi > 0 (finite) on a finite
  /// set of points r >= r_min, 0 <= s <= s_max(r).
  void validate() const;
};

/// Builds one of
///   euclidean-cone(n, c2)      psi = r,          a = 0
///   hyperbolic(n)              psi = sinh r,     a = 0, c2 = pi
///   exp-model(n, c, a[, c2])   psi = e^{c r},    requires c > a (c2 defaults to 1)
///   appendix-surface(a)        n = 2, psi = r e^{r^2 sin^2(s/2) + r}, c2 = 1
ManifoldModel builtin_model(std::string_view spec);

/// Reads {n, warp, a, c2, r_min, label}; alternatively {"builtin": "<spec>"}
/// with optional r_min/label overrides.
ManifoldModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const ManifoldModel& model);

/// The auxiliary model with warp e^{alpha r} psi used for the zero-curvature case.
ManifoldModel alpha_shifted(const ManifoldModel& model, double alpha);

}  // namespace weylspec::warp
