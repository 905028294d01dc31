#include "weylspec/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace weylspec::geometry {

namespace {

// Rounding noise in psi_r/psi (about 1e-18 in the wide type) must not read as growth.
constexpr double kNoiseFloor = 1e-13;

bool non_increasing(const std::vector<double>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[i - 1] * (1 + 1e-12) + kNoiseFloor) return false;
  }
  return true;
}

// Verdict for "this sequence tends to zero" from finitely many samples.
Verdict tends_to_zero(const std::vector<std::vector<double>>& sequences, double tol, std::string& note) {
  bool small = true;
  bool monotone = true;
  for (const auto& seq : sequences) {
    if (seq.empty()) continue;
    if (!(seq.back() <= tol)) small = false;
    if (!non_increasing(seq)) monotone = false;
  }
  if (!small) {
    note = "last sample exceeds tol_uniform";
    return Verdict::fail;
  }
  if (!monotone) {
    note = "small at the last sample but not monotone";
    return Verdict::inconclusive;
  }
  note = "monotone and below tol_uniform at the last sample";
  return Verdict::pass;
}

void check_grid(const SampleGrid& grid, const ManifoldModel& model) {
  if (grid.r_points < 1 || grid.s_points < 1) throw std::invalid_argument("empty sample grid");
  if (!(grid.r_min >= model.r_min)) {
    throw std::invalid_argument("sample grid starts below the model's r_min");
  }
  if (!(grid.r_max >= grid.r_min)) throw std::invalid_argument("sample grid needs r_max >= r_min");
}

Verdict finish(HypothesisReport& report) {
  std::vector<Verdict> vs;
  for (const auto& c : report.conditions) vs.push_back(c.verdict);
  report.verdict = combine(vs);
  return report.verdict;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict combine(const std::vector<Verdict>& verdicts) {
  bool any_inconclusive = false;
  for (Verdict v : verdicts) {
    if (v == Verdict::fail) return Verdict::fail;
    if (v == Verdict::inconclusive) any_inconclusive = true;
  }
  return any_inconclusive ? Verdict::inconclusive : Verdict::pass;
}

CurvatureSample curvature_at(const ManifoldModel& model, WideReal r, WideReal s) {
  if (!(r >= static_cast<WideReal>(model.r_min))) {
    throw std::invalid_argument("curvature_at: r below the model's r_min");
  }
  const warp::WarpJet j = model.jet(r, s);
  if (!(j.psi > 0)) throw std::domain_error("curvature_at: warp is not positive");
  const WideReal ratio = j.psi_r / j.psi;
  return {static_cast<double>(r), static_cast<double>(s), static_cast<double>(ratio),
          static_cast<double>((model.n - 1) * ratio), static_cast<double>(-j.psi_rr / j.psi)};
}

std::vector<double> SampleGrid::radii() const {
  std::vector<double> out;
  if (r_points == 1) return {r_min};
  for (int i = 0; i < r_points; ++i) {
    const double t = static_cast<double>(i) / (r_points - 1);
    out.push_back(geometric ? r_min * std::pow(r_max / r_min, t) : r_min + t * (r_max - r_min));
  }
  out.back() = r_max;
  return out;
}

std::vector<WideReal> SampleGrid::angles(WideReal s_max) const {
  if (s_points == 1) return {0};
  std::vector<WideReal> out;
  for (int j = 0; j < s_points; ++j) {
    out.push_back(s_max * (1 - std::cos(std::numbers::pi_v<WideReal> * j / (s_points - 1))) / 2);
  }
  return out;
}

HypothesisReport check_thm1(const ManifoldModel& model, double c, double c1, const SampleGrid& grid,
                            const CheckOptions& options) {
  if (!(c > 0)) throw std::invalid_argument("check_thm1: requires c > 0");
  check_grid(grid, model);
  const double a = model.neighborhood.a;
  HypothesisReport report;
  report.check = "thm1";
  report.model_label = model.label;
  report.parameters = {{"c", c},
                       {"a", a},
                       {"c1", c1},
                       {"c2", model.neighborhood.c2},
                       {"tol_uniform", options.tol_uniform},
                       {"c_exceeds_a", c > a ? 1.0 : 0.0}};

  ConditionResult mean{"i", Verdict::pass, 0, {}, {}};
  ConditionResult angular{"ii", Verdict::pass, 0, {}, {}};
  std::vector<double> slice_sups;
  bool bound_held = true;
  for (double r : grid.radii()) {
    double sup_i = 0;
    double sup_ii = 0;
    for (WideReal s : grid.angles(model.s_max(r))) {
      const warp::WarpJet j = model.jet(r, s);
      sup_i = std::max(sup_i, static_cast<double>(std::abs(j.psi_r / j.psi - c)));
      sup_ii = std::max(sup_ii, static_cast<double>(std::abs(j.psi_s / j.psi)));
    }
    if (sup_ii > c1) bound_held = false;
    slice_sups.push_back(sup_i);
    mean.trend.push_back({r, sup_i});
    angular.trend.push_back({r, sup_ii});
    mean.observed_sup = std::max(mean.observed_sup, sup_i);
    angular.observed_sup = std::max(angular.observed_sup, sup_ii);
  }
  mean.verdict = tends_to_zero({slice_sups}, options.tol_uniform, mean.note);
  angular.verdict = bound_held ? Verdict::pass : Verdict::fail;
  angular.note = bound_held ? "|psi_s/psi| <= c1 at every sample" : "|psi_s/psi| exceeds c1";
  report.conditions = {mean, angular};
  finish(report);
  return report;
}

HypothesisReport check_thm2(const ManifoldModel& model, double c1, double gamma, const SampleGrid& grid,
                            const CheckOptions& options) {
  if (model.neighborhood.a != 0) throw std::invalid_argument("check_thm2: requires a = 0");
  if (!(gamma > 1)) throw std::invalid_argument("check_thm2: requires gamma > 1");
  check_grid(grid, model);
  HypothesisReport report;
  report.check = "thm2";
  report.model_label = model.label;
  report.parameters = {{"c1", c1},
                       {"gamma", gamma},
                       {"c2", model.neighborhood.c2},
                       {"tol_uniform", options.tol_uniform},
                       {"growth_factor", options.growth_factor}};

  const std::vector<double> radii = grid.radii();
  // a = 0, so the angular samples are the same on every slice.
  const std::vector<WideReal> angles = grid.angles(model.s_max(radii.front()));
  std::vector<std::vector<double>> per_s(angles.size());
  std::vector<WideReal> first_psi(angles.size()), last_psi(angles.size());
  ConditionResult ratio{"i", Verdict::pass, 0, {}, {}};
  ConditionResult growth{"ii", Verdict::pass, 0, {}, {}};
  ConditionResult angular{"iii", Verdict::pass, 0, {}, {}};
  bool bound_held = true;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    double sup_i = 0;
    double sup_iii = 0;
    double min_psi = std::numeric_limits<double>::infinity();
    for (std::size_t si = 0; si < angles.size(); ++si) {
      const warp::WarpJet j = model.jet(r, angles[si]);
      const double q = static_cast<double>(std::abs(j.psi_r / j.psi));
      per_s[si].push_back(q);
      sup_i = std::max(sup_i, q);
      const double weighted = static_cast<double>(std::abs(j.psi_s / j.psi) * std::pow(WideReal(r), gamma));
      sup_iii = std::max(sup_iii, weighted);
      if (weighted > c1) bound_held = false;
      if (ri == 0) first_psi[si] = j.psi;
      last_psi[si] = j.psi;
      min_psi = std::min(min_psi, static_cast<double>(j.psi));
    }
    ratio.trend.push_back({r, sup_i});
    growth.trend.push_back({r, min_psi});
    angular.trend.push_back({r, sup_iii});
    ratio.observed_sup = std::max(ratio.observed_sup, sup_i);
    angular.observed_sup = std::max(angular.observed_sup, sup_iii);
  }
  ratio.verdict = tends_to_zero(per_s, options.tol_uniform, ratio.note);

  WideReal min_growth = std::numeric_limits<WideReal>::infinity();
  for (std::size_t si = 0; si < angles.size(); ++si) min_growth = std::min(min_growth, last_psi[si] / first_psi[si]);
  growth.observed_sup = static_cast<double>(std::min(min_growth, WideReal(std::numeric_limits<double>::max())));
  growth.verdict = min_growth >= options.growth_factor ? Verdict::pass : Verdict::fail;
  growth.note = "observed value is min over s of psi(r_max, s) / psi(r_min, s)";

  angular.verdict = bound_held ? Verdict::pass : Verdict::fail;
  angular.note = bound_held ? "|psi_s/psi| r^gamma <= c1 at every sample" : "|psi_s/psi| r^gamma exceeds c1";
  report.conditions = {ratio, growth, angular};
  finish(report);
  return report;
}

HypothesisReport check_kumura(const ManifoldModel& model, double c, const std::vector<double>& r_list,
                              const KumuraOptions& options) {
  if (r_list.empty()) throw std::invalid_argument("check_kumura: empty threshold list");
  for (std::size_t i = 1; i < r_list.size(); ++i) {
    if (!(r_list[i] > r_list[i - 1])) throw std::invalid_argument("check_kumura: thresholds must increase");
  }
  if (!(r_list.front() >= model.r_min)) throw std::invalid_argument("check_kumura: threshold below r_min");
  if (options.s_points < 1) throw std::invalid_argument("check_kumura: empty angular sample");

  std::vector<double> samples(r_list);
  const double top = 2 * r_list.back();
  for (int i = 0; i <= options.extra_radii; ++i) {
    samples.push_back(r_list.front() * std::pow(top / r_list.front(), static_cast<double>(i) / options.extra_radii));
  }
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

  SampleGrid angular;
  angular.s_points = options.s_points;
  // Per-radius sup over s, then suffix maxima give sup over r >= t.
  std::vector<double> slice(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const WideReal s_max =
        options.range == AngularRange::full ? std::numbers::pi_v<WideReal> : model.s_max(samples[i]);
    double sup = 0;
    for (WideReal s : angular.angles(s_max)) {
      // sin s vanishes at s = pi where polar coordinates degenerate; stay inside.
      const WideReal ss = std::min(s, std::numbers::pi_v<WideReal> * (1 - 1e-9L));
      const warp::WarpJet j = model.jet(samples[i], ss);
      sup = std::max(sup, static_cast<double>(std::abs((model.n - 1) * j.psi_r / j.psi - c)));
    }
    if (!std::isfinite(sup)) throw std::overflow_error("check_kumura: |Delta r - c| overflowed");
    slice[i] = sup;
  }
  ConditionResult cond{"kumura", Verdict::pass, 0, {}, {}};
  std::vector<double> sups;
  for (double t : r_list) {
    double sup = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i] >= t) sup = std::max(sup, slice[i]);
    }
    sups.push_back(sup);
    cond.trend.push_back({t, sup});
    cond.observed_sup = std::max(cond.observed_sup, sup);
  }
  cond.verdict = tends_to_zero({sups}, options.tol, cond.note);

  HypothesisReport report;
  report.check = "kumura";
  report.model_label = model.label;
  report.parameters = {{"c", c},
                       {"tol", options.tol},
                       {"full_angular_range", options.range == AngularRange::full ? 1.0 : 0.0},
                       {"r_sample_max", top}};
  report.conditions = {cond};
  finish(report);
  return report;
}

HoroballResult horoball_margin(double r_max, int grid_steps, double c2, double a) {
  if (!(r_max > 0)) throw std::invalid_argument("horoball_margin: r_max must be > 0");
  if (grid_steps < 2) throw std::invalid_argument("horoball_margin: grid_steps must be >= 2");
  HoroballResult out{true, std::numeric_limits<double>::infinity(), 0, 0};
  for (int i = 0; i < grid_steps; ++i) {
    const WideReal r = static_cast<WideReal>(r_max) * i / (grid_steps - 1);
    const WideReal top = c2 * std::exp(-static_cast<WideReal>(a) * r);
    for (int j = 1; j <= grid_steps; ++j) {
      const WideReal s = top * j / grid_steps;
      const WideReal one_plus_cos = 1 + std::cos(s);
      const WideReal sn = std::sin(s);
      const double margin = static_cast<double>(one_plus_cos * one_plus_cos - sn * sn * std::exp(r));
      if (margin < out.min_margin) out = {out.holds, margin, static_cast<double>(r), static_cast<double>(s)};
      if (!(margin >= 0)) out.holds = false;
    }
  }
  return out;
}

}  // namespace weylspec::geometry
