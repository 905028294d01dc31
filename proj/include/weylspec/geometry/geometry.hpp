#pragma once

#include <string>
#include <utility>
#include <vector>

#include "weylspec/warp/model.hpp"

namespace weylspec::geometry {

using numerics::WideReal;
using warp::ManifoldModel;

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict v);

/// pass only if all pass; fail if any fails; otherwise inconclusive.
Verdict combine(const std::vector<Verdict>& verdicts);

struct TrendPoint {
  double r;
  double sup;
};

struct ConditionResult {
  std::string id;
  Verdict verdict = Verdict::inconclusive;
  double observed_sup = 0;  ///< worst value seen over all samples
  std::vector<TrendPoint> trend;
  std::string note;
};

struct HypothesisReport {
  std::string check;  ///< "thm1", "thm2" or "kumura"
  std::string model_label;
  Verdict verdict = Verdict::inconclusive;
  std::vector<ConditionResult> conditions;
  std::vector<std::pair<std::string, double>> parameters;  ///< echoed inputs, in a fixed order
};

struct CurvatureSample {
  double r;
  double s;
  double mean_curvature_ratio;  ///< psi_r / psi
  double laplacian_r;           ///< (n - 1) psi_r / psi = Delta r
  double radial_K;              ///< -psi_rr / psi
};

CurvatureSample curvature_at(const ManifoldModel& model, WideReal r, WideReal s);

/// Radial samples in [r_min, r_max] (geometric or uniform) and, on each
/// slice, s_points Chebyshev-spaced angles s_j = s_max (1 - cos(j pi / (s_points - 1))) / 2.
struct SampleGrid {
  double r_min = 1;
  double r_max = 2000;
  int r_points = 48;
  int s_points = 33;
  bool geometric = true;

  std::vector<double> radii() const;
  std::vector<WideReal> angles(WideReal s_max) const;
};

struct CheckOptions {
  double tol_uniform = 1e-3;  ///< a trend "tends to 0" when monotone and at most this at the last sample
  double growth_factor = 10;  ///< psi(last) / psi(first) needed to call psi unbounded
};

/// Conditions (i) sup_s |psi_r/psi - c| -> 0 on C_a(N) and (ii) |psi_s/psi| <= c1.
/// Requires c > 0 and a >= 0; whether c > a is echoed as the parameter "c_exceeds_a".
HypothesisReport check_thm1(const ManifoldModel& model, double c, double c1, const SampleGrid& grid,
                            const CheckOptions& options = {});

/// Conditions (i) psi_r/psi -> 0 for each fixed s, (ii) psi -> infinity,
/// (iii) |psi_s/psi| <= c1 / r^gamma. Requires a = 0 and gamma > 1.
HypothesisReport check_thm2(const ManifoldModel& model, double c1, double gamma, const SampleGrid& grid,
                            const CheckOptions& options = {});

enum class AngularRange { neighborhood, full };

struct KumuraOptions {
  double tol = 1e-3;
  AngularRange range = AngularRange::neighborhood;
  int s_points = 33;
  int extra_radii = 64;  ///< geometric samples added between the first threshold and twice the last
};

/// For each threshold t in r_list: sup over sampled r >= t and s of |Delta r - c|.
HypothesisReport check_kumura(const ManifoldModel& model, double c, const std::vector<double>& r_list,
                              const KumuraOptions& options = {});

struct HoroballResult {
  bool holds;
  double min_margin;
  double r_at_min;
  double s_at_min;
};

/// Checks sin^2(s) e^r <= (1 + cos s)^2 on 0 <= r <= r_max, 0 < s <= c2 e^{-a r}
/// (the horoball text uses c2 = 1, a = 1/2).
HoroballResult horoball_margin(double r_max, int grid_steps, double c2 = 1, double a = 0.5);

}  // namespace weylspec::geometry
