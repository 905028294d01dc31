// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "weylspec/eigen/eigen.hpp"
#include "weylspec/geometry/geometry.hpp"
#include "weylspec/numerics/quadrature.hpp"
#include "weylspec/warp/model.hpp"
#include "weylspec/weyl/weyl.hpp"

using namespace weylspec;
using numerics::WideReal;

namespace {

const double kPi = std::numbers::pi;
const double kJ01 = 2.404825557695773;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

warp::ManifoldModel custom(const std::string& warp_text) {
  return warp::model_from_json({{"n", 2}, {"warp", warp_text}, {"a", 0}, {"c2", 1}});
}

weyl::WeylParams params(double lambda, int k, int m, double c = 0, double alpha = 0) {
  weyl::WeylParams p;
  p.lambda = lambda;
  p.k = k;
  p.m = m;
  p.c = c;
  p.alpha = alpha;
  return p;
}

// 1. Dirichlet spectrum of psi = e^r on [0, 20].
void radial_oracle(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  eigen::RadialOptions opt;
  opt.r_start = 0;
  const eigen::EigenReport rep = eigen::radial_eigs(custom("exp(r)"), 20, 1e-3, 5, opt);
  const double elapsed = seconds_since(t0);
  double worst = 0;
  for (int j = 1; j <= 5; ++j) {
    const double exact = 0.25 + std::pow(j * kPi / 20, 2);
    worst = std::max(worst, std::abs(rep.eigenvalues.at(j - 1) / exact - 1));
  }
  o.detail << "max rel err " << worst << ", " << elapsed << " s";
  o.require(worst <= 1e-4, "rel err <= 1e-4");
  o.require(elapsed <= 10, "runtime <= 10 s");
}

// 2. Cone: lambda_1 R^2 = j01^2 and the bottom trend tends to 0.
void cone_oracle(Outcome& o) {
  const auto cone = warp::builtin_model("euclidean-cone(2, 0.5)");
  eigen::RadialOptions opt;
  opt.r_start = 0;
  std::vector<eigen::EigenReport> reps;
  double worst = 0;
  for (double R : {10.0, 20.0, 40.0}) {
    reps.push_back(eigen::radial_eigs(cone, R, R * 1e-4, 1, opt));
    worst = std::max(worst, std::abs(reps.back().eigenvalues[0] * R * R / (kJ01 * kJ01) - 1));
  }
  const eigen::BottomTrend trend = eigen::bottom_trend(reps);
  o.detail << "max rel err of lambda_1 R^2 " << worst << ", bottom estimate " << trend.estimate;
  o.require(reps[0].boundary == "regular-dirichlet", "regular origin");
  o.require(worst <= 1e-3, "lambda_1 R^2 within 1e-3");
  o.require(std::abs(trend.estimate) <= 5e-3, "bottom within 5e-3 of 0");
}

// 3. Residual ratios on exp-model(2, 1, 1/2).
void weyl_convergence(Outcome& o) {
  const auto model = warp::builtin_model("exp-model(2, 1, 0.5)");
  weyl::SweepOptions opt;
  opt.c = 1;
  opt.epsilon = 0.05;
  for (double lambda : {0.3, 0.5, 1.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const weyl::SweepResult res = weyl::residual_sweep(model, {lambda}, {8, 16, 32, 64}, 4, opt);
    const double elapsed = seconds_since(t0);
    const double last = res.rows.back().report.ratio;
    o.detail << "lambda " << lambda << ": ratio(64) " << last << " in " << elapsed << " s; ";
    o.require(res.summaries[0].strictly_decreasing, "strictly decreasing at lambda " + std::to_string(lambda));
    o.require(last <= 0.05, "ratio <= 0.05 at k = 64");
    o.require(elapsed <= 60, "runtime <= 60 s per lambda");
  }
  bool rejected = false;
  try {
    weyl::beta_of(0.1, 2, 1);
  } catch (const weyl::PreconditionError&) {
    rejected = true;
  }
  o.detail << "lambda 0.1 " << (rejected ? "rejected" : "accepted");
  o.require(rejected, "lambda 0.1 rejected");
}

// 4. Zero-curvature path on the cone.
void zero_path(Outcome& o) {
  const auto cone = warp::builtin_model("euclidean-cone(2, 0.5)");
  double worst_norm = 0;
  for (double lambda : {0.5, 1.0}) {
    double best = 1e300;
    for (int k : {8, 16, 32, 64}) {
      const weyl::WeylFunction wf = weyl::build_weyl_zero(params(lambda, k, 4, 0, 0.05), cone);
      best = std::min(best, weyl::residual(wf, cone).ratio);
      const weyl::ZeroPathNorms norms = weyl::zero_path_norms(wf);
      worst_norm = std::max(worst_norm, std::abs(norms.norm_on_shifted / norms.norm_on_model - 1));
    }
    o.detail << "lambda " << lambda << ": best ratio " << best << "; ";
    o.require(best <= 0.1, "ratio <= 0.1 at some k <= 64");
  }
  o.detail << "norm equality rel diff " << worst_norm;
  o.require(worst_norm <= 1e-8, "norm equality to 1e-8");
}

// 5. First two explicit constants of the cut-off lemma.
void lemma_constants(Outcome& o) {
  const auto model = warp::builtin_model("exp-model(2, 1, 0.5)");
  const double lambda = 0.5;
  const double bound_a = std::sqrt(2.0) * 3;
  const double bound_b = (2 * lambda + 3) * std::sqrt(2.0) * 3;
  for (int k : {12, 16, 24}) {
    const weyl::Lemma5Report rep = weyl::lemma5_ratios(weyl::build_weyl(params(lambda, k, 4, 1), model));
    const double a = rep.entries.at(0).measured;
    const double b = rep.entries.at(1).measured;
    o.detail << "k " << k << ": a " << a << ", b " << b << "; ";
    o.require(a <= bound_a, "a <= 3 sqrt 2 at k " + std::to_string(k));
    o.require(b <= bound_b, "b <= (2 lambda + 3) 3 sqrt 2 at k " + std::to_string(k));
  }
  o.detail << "bounds " << bound_a << ", " << bound_b;
}

// 6. Appendix surface.
void appendix(Outcome& o) {
  const auto surf = warp::builtin_model("appendix-surface(1)");
  double worst = 0;
  for (double r : {1.0, 2.0, 5.0, 10.0}) {
    worst = std::max(worst, std::abs(geometry::curvature_at(surf, r, 0).radial_K - (-1 - 2 / r)));
  }
  bool decreasing = true;
  double prev = 0;
  bool first = true;
  for (double r : {2.0, 4.0, 8.0, 16.0}) {
    const double K = geometry::curvature_at(surf, r, 1).radial_K;
    if (!first && !(K < prev)) decreasing = false;
    prev = K;
    first = false;
  }
  const geometry::HypothesisReport thm1 = geometry::check_thm1(surf, 1, 1, geometry::SampleGrid{});
  const auto weyl_model = warp::builtin_model("appendix-surface(0.5)");
  weyl::SweepOptions opt;
  opt.c = 1;
  opt.epsilon = 0.1;
  const weyl::SweepResult res = weyl::residual_sweep(weyl_model, {0.5}, {8, 16, 32, 64}, 4, opt);
  double best = 1e300;
  for (const auto& row : res.rows) best = std::min(best, row.report.ratio);
  o.detail << "K(r,0) max err " << worst << ", K(16,1) " << prev << ", thm1 " << geometry::to_string(thm1.verdict)
           << ", best ratio " << best;
  o.require(worst <= 1e-10, "K(r,0) = -1 - 2/r");
  o.require(decreasing, "K(r,1) strictly decreasing");
  o.require(thm1.verdict == geometry::Verdict::pass, "thm1 check passes");
  o.require(best <= 0.1, "ratio <= 0.1 at some k <= 64");
}

/// Delta u + lambda u by five-point differences of the metric Laplacian.
WideReal fd_residual(const weyl::WeylFunction& wf, const warp::ManifoldModel& model, WideReal r, WideReal s) {
  const int n = model.n;
  const WideReal hr = 1e-3L;
  const WideReal hs = 1e-3L * wf.delta_wide();
  auto d1 = [](auto f, WideReal x, WideReal h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
  };
  auto d2 = [](auto f, WideReal x, WideReal h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
  };
  auto ur = [&](WideReal x) { return wf.u(x, s); };
  auto us = [&](WideReal x) { return wf.u(r, x); };
  auto psi_r = [&](WideReal x) { return model.psi(x, s); };
  auto psi_s = [&](WideReal x) { return model.psi(r, x); };
  const WideReal psi = model.psi(r, s);
  const WideReal lap = d2(ur, r, hr) + (n - 1) * d1(psi_r, r, hr) / psi * d1(ur, r, hr) +
                       (d2(us, s, hs) + ((n - 2) * std::cos(s) / std::sin(s) + (n - 3) * d1(psi_s, s, hs) / psi) *
                                            d1(us, s, hs)) /
                           (psi * psi);
  return lap + static_cast<WideReal>(wf.params().lambda) * wf.u(r, s);
}

// 7. Structural identities.
void structural(Outcome& o) {
  const double beta = std::sqrt(0.5 - 0.25);
  const int k = 8, p = 2;
  auto cos2 = [&](double r) { return std::cos(beta * r) * std::cos(beta * r); };
  numerics::QuadratureSpec quad;
  const double full = numerics::integrate(cos2, weyl::node_radius(k, beta), weyl::node_radius(k + 4 * p, beta), quad);
  const double core =
      numerics::integrate(cos2, weyl::node_radius(k + p, beta), weyl::node_radius(k + 3 * p, beta), quad);
  const double split_err = std::abs(full - 2 * core) / full;
  o.require(split_err <= 1e-9, "cos^2 split");

  const auto model = warp::builtin_model("exp-model(2, 1, 0.5)");
  const weyl::WeylFunction wf = weyl::build_weyl(params(0.5, 8, 4, 1), model);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0, 1);
  const WideReal r0 = wf.support_begin(), r1 = wf.support_end();
  std::vector<WideReal> diffs;
  WideReal scale = 0;
  for (int i = 0; i < 200; ++i) {
    const WideReal r = r0 + 0.01L + (r1 - r0 - 0.02L) * u01(rng);
    const WideReal s = wf.delta_wide() * (0.01L + 0.98L * u01(rng));
    const weyl::PointTerms pt = wf.terms_at(r, s);
    diffs.push_back(std::abs(fd_residual(wf, model, r, s) - pt.total()));
    scale = std::max(scale, std::abs(static_cast<WideReal>(0.5) * pt.u));
  }
  const double termwise = static_cast<double>(*std::max_element(diffs.begin(), diffs.end()) / scale);
  o.require(termwise <= 1e-4, "termwise sum vs finite differences");

  const bool disjoint = weyl::closed_supports_disjoint(weyl::disjoint_family(8, 2, 6, beta));
  o.require(disjoint, "disjoint family");

  const weyl::ResidualReport base = weyl::residual(wf, model);
  double scale_err = 0;
  for (double factor : {1e-3, 7.5, 1e6}) {
    scale_err = std::max(scale_err, std::abs(weyl::residual(wf.scaled(factor), model).ratio - base.ratio));
  }
  o.require(scale_err <= 1e-12, "scaling invariance");
  o.detail << "cos^2 split rel err " << split_err << ", termwise rel err " << termwise << ", family "
           << (disjoint ? "disjoint" : "overlapping") << ", scaling diff " << scale_err;
}

// 8. Horoball inclusion.
void horoball(Outcome& o) {
  const geometry::HoroballResult res = geometry::horoball_margin(50, 400);
  o.detail << "min margin " << res.min_margin << " at r " << res.r_at_min << ", s " << res.s_at_min;
  o.require(res.holds && res.min_margin > 0, "positive margin");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"radial oracle psi = e^r", radial_oracle},
      {"cone oracle j01^2 and bottom trend", cone_oracle},
      {"Weyl residual convergence on exp-model", weyl_convergence},
      {"zero-curvature path on the cone", zero_path},
      {"cut-off lemma constants", lemma_constants},
      {"appendix surface", appendix},
      {"structural identities", structural},
      {"horoball inclusion", horoball},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    if (!o.pass) ++failures;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
