#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "weylspec/numerics/quadrature.hpp"
#include "weylspec/weyl/weyl.hpp"

using namespace weylspec;
using namespace weylspec::weyl;
using numerics::WideReal;

namespace {

const double kPi = std::numbers::pi;

WeylParams params(double lambda, int k, int m, double c = 0, double alpha = 0) {
  WeylParams p;
  p.lambda = lambda;
  p.k = k;
  p.m = m;
  p.c = c;
  p.alpha = alpha;
  return p;
}

/// Delta u + lambda u from five-point differences on the metric Laplacian.
WideReal fd_residual(const WeylFunction& wf, const warp::ManifoldModel& model, WideReal r, WideReal s) {
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
  const WideReal pr = d1(psi_r, r, hr);
  const WideReal ps = d1(psi_s, s, hs);
  const WideReal lap = d2(ur, r, hr) + (n - 1) * pr / psi * d1(ur, r, hr) +
                       (d2(us, s, hs) + ((n - 2) * std::cos(s) / std::sin(s) + (n - 3) * ps / psi) * d1(us, s, hs)) /
                           (psi * psi);
  return lap + static_cast<WideReal>(wf.params().lambda) * wf.u(r, s);
}

void check_termwise(const WeylFunction& wf, const warp::ManifoldModel& model, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0, 1);
  const WideReal r0 = wf.support_begin(), r1 = wf.support_end();
  std::vector<WideReal> fd, sum;
  WideReal scale = 0;
  for (int i = 0; i < 200; ++i) {
    const WideReal r = r0 + 0.01L + (r1 - r0 - 0.02L) * u01(rng);
    const WideReal s = wf.delta_wide() * (0.01L + 0.98L * u01(rng));
    fd.push_back(fd_residual(wf, model, r, s));
    const PointTerms pt = wf.terms_at(r, s);
    sum.push_back(pt.total());
    scale = std::max(scale, std::abs(static_cast<WideReal>(wf.params().lambda) * pt.u));
  }
  REQUIRE(scale > 0);
  WideReal worst = 0;
  for (std::size_t i = 0; i < fd.size(); ++i) worst = std::max(worst, std::abs(fd[i] - sum[i]) / scale);
  CAPTURE(model.label);
  CHECK(static_cast<double>(worst) <= 1e-4);
}

}  // namespace

TEST_CASE("node radii and the cut-off profile") {
  CHECK(node_radius(0, 1) == doctest::Approx(kPi / 2));
  CHECK(node_radius(3, 0.5) == doctest::Approx(7 * kPi));
  CHECK_THROWS_AS(node_radius(1, 0), std::invalid_argument);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const int k = static_cast<int>(rng() % 200);
    const double beta = 0.1 + (rng() % 1000) / 500.0;
    CHECK(std::abs(std::cos(beta * node_radius(k, beta))) <= 1e-12);
  }

  CHECK(cutoff_H(0).value == 1);
  CHECK(cutoff_H(1).value == 0);
  CHECK(cutoff_H(-1).value == 0);
  CHECK(static_cast<double>(cutoff_H(0.75L).value) == doctest::Approx(0.5));
  CHECK(static_cast<double>(cutoff_H(-0.75L).value) == doctest::Approx(0.5));
  for (WideReal t : {-1.0L, -0.5L, 0.5L, 1.0L}) {
    CHECK(cutoff_H(t).d1 == 0);
    CHECK(cutoff_H(t).d2 == 0);
  }
  CHECK(static_cast<double>(std::abs(cutoff_H(0.75L).d1)) == doctest::Approx(3.75));
  WideReal sup = 0;
  for (int i = 0; i <= 4000; ++i) {
    const WideReal t = -1.2L + 2.4L * i / 4000;
    const CutoffValue H = cutoff_H(t);
    CHECK(H.value >= 0);
    CHECK(H.value <= 1);
    sup = std::max(sup, std::abs(H.d1));
    // Analytic derivatives against central differences.
    const WideReal h = 1e-6L;
    if (std::abs(std::abs(t) - 0.5L) > 2 * h && std::abs(std::abs(t) - 1) > 2 * h) {
      const WideReal fd1 = (cutoff_H(t + h).value - cutoff_H(t - h).value) / (2 * h);
      const WideReal fd2 = (cutoff_H(t + h).d1 - cutoff_H(t - h).d1) / (2 * h);
      CHECK(static_cast<double>(std::abs(fd1 - H.d1)) <= 1e-8);
      CHECK(static_cast<double>(std::abs(fd2 - H.d2)) <= 1e-6);
    }
  }
  CHECK(static_cast<double>(sup) <= 3.75 + 1e-12);
}

TEST_CASE("beta and the spectrum bottom") {
  CHECK(beta_of(0.5, 2, 1) == doctest::Approx(0.5));
  CHECK(beta_of(1, 3, 0) == doctest::Approx(1));
  CHECK_THROWS_AS(beta_of(0.1, 2, 1), PreconditionError);
  CHECK_THROWS_WITH(beta_of(0.25, 2, 1), doctest::Contains("essential-spectrum bottom"));
}

TEST_CASE("build_weyl support and pointwise values") {
  const auto model = warp::builtin_model("exp-model(2, 1, 0.5)");
  const WeylFunction wf = build_weyl(params(0.5, 8, 4, 1), model);
  CHECK(wf.p() == 2);
  CHECK(wf.support_begin() == doctest::Approx(17 * kPi));
  CHECK(wf.support_end() == doctest::Approx(33 * kPi));
  CHECK(wf.delta() == doctest::Approx(std::exp(-0.5 * 33 * kPi)).epsilon(1e-12));

  for (WideReal s : {0.0L, 0.3L * wf.delta_wide(), 0.9L * wf.delta_wide()}) CHECK(wf.u(wf.support_begin(), s) == 0);
  // At the centre node h = 1 and g(0) = 1, so u = v^{-1/2} cos(beta r) with v = e^r - 1.
  const WideReal mid = wf.node(8 + 4);
  const WideReal v = std::expm1(mid);
  const WideReal expected = std::cos(0.5L * mid) / std::sqrt(v);
  CHECK(std::abs(static_cast<double>((wf.u(mid, 0) - expected) / std::max(std::abs(expected), 1 / std::sqrt(v)))) <=
        1e-10);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0, 1);
  for (int i = 0; i < 100; ++i) {
    // Outside the rectangle both u and every residual term vanish.
    const WideReal r = u01(rng) < 0.5 ? wf.support_begin() * u01(rng) : wf.support_end() * (1 + u01(rng));
    const WideReal s = wf.delta_wide() * 3 * u01(rng);
    const PointTerms a = wf.terms_at(r, s);
    CHECK(a.u == 0);
    CHECK(a.total() == 0);
    const WideReal r_in = wf.support_begin() + (wf.support_end() - wf.support_begin()) * u01(rng);
    const WideReal s_out = wf.delta_wide() * (1 + u01(rng));
    const PointTerms b = wf.terms_at(r_in, s_out);
    CHECK(b.u == 0);
    CHECK(b.total() == 0);
  }
}

TEST_CASE("termwise residual matches finite differences of the metric Laplacian") {
  const auto ex2 = warp::builtin_model("exp-model(2, 1, 0.5)");
  check_termwise(build_weyl(params(0.5, 8, 4, 1), ex2), ex2, 1);
  const auto ex3 = warp::builtin_model("exp-model(3, 1, 0.5)");
  check_termwise(build_weyl(params(1.5, 8, 4, 1), ex3), ex3, 2);
  const auto app = warp::builtin_model("appendix-surface(0.5)");
  check_termwise(build_weyl(params(0.5, 8, 4, 1), app), app, 3);
  const auto wobbly = warp::model_from_json(
      nlohmann::json::parse(R"j({"n": 4, "warp": "r*(2 + sin(s))", "a": 0, "c2": 0.8})j"));
  check_termwise(build_weyl(params(1, 8, 4), wobbly), wobbly, 4);
  const auto cone = warp::builtin_model("euclidean-cone(2, 0.5)");
  check_termwise(build_weyl_zero(params(1, 8, 4, 0, 0.05), cone), cone, 5);
}

TEST_CASE("residual report on the exponential model") {
  const auto model = warp::builtin_model("exp-model(2, 1, 0.5)");
  const WeylFunction wf = build_weyl(params(0.5, 8, 4, 1), model);
  const ResidualReport rep = residual(wf, model);
  CHECK(rep.lambda_reproduced == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rep.p == 2);
  CHECK(rep.path == "regular");
  // A and B vanish up to e^{-r_k} on this model.
  CHECK(rep.term_norms[0] < 1e-6 * rep.norm_u);
  CHECK(rep.term_norms[1] < 1e-6 * rep.norm_u);
  CHECK(rep.ratio == doctest::Approx(rep.norm_residual / rep.norm_u).epsilon(1e-12));
  CHECK(rep.ratio < 0.1);

  // Scaling u leaves the ratio unchanged.
  for (double factor : {1e-3, 7.5, 1e6}) {
    const ResidualReport scaled = residual(wf.scaled(factor), model);
    CHECK(std::abs(scaled.ratio - rep.ratio) <= 1e-12);
    CHECK(scaled.norm_u == doctest::Approx(factor * rep.norm_u).epsilon(1e-10));
  }

  // Doubling p at fixed k shrinks the cut-off terms.
  auto cutoff_part = [](const ResidualReport& r) { return std::hypot(r.term_norms[2], r.term_norms[3]) / r.norm_u; };
  const ResidualReport wide = residual(build_weyl(params(0.5, 32, 4, 1), model), model);
  const ResidualReport narrow = residual(build_weyl(params(0.5, 32, 8, 1), model), model);
  CHECK(cutoff_part(narrow) / cutoff_part(wide) > 1);
  CHECK(narrow.ratio / wide.ratio > 1);

  const auto other = warp::builtin_model("hyperbolic(2)");
  CHECK_THROWS_AS(residual(wf, other), std::invalid_argument);
}

TEST_CASE("zero path") {
  const auto cone = warp::builtin_model("euclidean-cone(2, 0.5)");
  const WeylFunction wf = build_weyl_zero(params(1, 8, 4, 0, 0.1), cone);
  CHECK(wf.beta() == doctest::Approx(1));
  CHECK(wf.support_begin() == doctest::Approx(17 * kPi / 2));
  CHECK(wf.delta() == doctest::Approx(0.5));
  CHECK(build_weyl_zero(params(1, 32, 4, 0, 0.1), cone).delta() == doctest::Approx(0.5));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0, 1);
  for (int i = 0; i < 50; ++i) {
    const WideReal r = wf.support_begin() + (wf.support_end() - wf.support_begin()) * u01(rng);
    const WideReal s = 0.5L * u01(rng);
    const WideReal ua = wf.u_alpha(r, s);
    CHECK(std::abs(static_cast<double>(wf.mu(r) * wf.u(r, s) - ua)) <= 1e-12 * std::abs(static_cast<double>(ua)) + 1e-300);
  }

  const ZeroPathNorms norms = zero_path_norms(wf);
  CHECK(std::abs(norms.norm_on_model / norms.norm_on_shifted - 1) <= 1e-8);

  // alpha = 0 reduces to the regular construction with c = 0.
  const WeylFunction z0 = build_weyl_zero(params(0.7, 12, 4, 0, 0), cone);
  const WeylFunction r0 = build_weyl(params(0.7, 12, 4, 0, 0), cone);
  for (int i = 0; i < 50; ++i) {
    const WideReal r = z0.support_begin() + (z0.support_end() - z0.support_begin()) * u01(rng);
    const WideReal s = 0.5L * u01(rng);
    const WideReal a = z0.u(r, s), b = r0.u(r, s);
    CHECK(std::abs(static_cast<double>(a - b)) <= 1e-12 * std::max(1e-300, std::abs(static_cast<double>(b))));
  }

  CHECK_THROWS_AS(build_weyl_zero(params(0.001, 8, 4, 0, 0.1), cone), PreconditionError);
  CHECK_THROWS_AS(build_weyl_zero(params(1, 8, 4, 0, 0.1), warp::builtin_model("exp-model(2, 1, 0.5)")),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_weyl(params(0.5, 8, 4, 0), cone).u_alpha(30, 0.1L), std::logic_error);
}

TEST_CASE("lemma 5 ratios") {
  const auto model = warp::builtin_model("exp-model(2, 1, 0.5)");
  const WeylFunction wf = build_weyl(params(0.5, 12, 4, 1), model);
  const Lemma5Report rep = lemma5_ratios(wf);
  REQUIRE(rep.entries.size() == 5);
  CHECK(rep.entries[0].name == "a");
  CHECK(*rep.entries[0].bound == doctest::Approx(std::sqrt(2.0) * 3));
  CHECK(rep.entries[0].measured <= std::sqrt(2.0) * 3);
  CHECK(*rep.entries[1].bound == doctest::Approx(4 * std::sqrt(2.0) * 3));
  CHECK(rep.entries[1].measured <= 4 * std::sqrt(2.0) * 3);
  // psi does not depend on s here.
  CHECK(rep.entries[2].measured == 0);
  CHECK_FALSE(rep.entries[2].log10_constant.has_value());
  CHECK(rep.entries[4].log10_constant.has_value());

  numerics::QuadratureSpec tight;
  tight.rel_tol = 1e-11;
  const Lemma5Report again = lemma5_ratios(wf, tight);
  CHECK(std::abs(again.entries[0].measured - rep.entries[0].measured) <= 1e-6);

  CHECK_THROWS_AS(lemma5_ratios(build_weyl(params(0.5, 4, 4, 1), model)), std::invalid_argument);
}

TEST_CASE("disjoint families") {
  const auto fam = disjoint_family(8, 2, 3, 0.5);
  REQUIRE(fam.size() == 3);
  CHECK(fam[0].k == 8);
  CHECK(fam[1].k == 17);
  CHECK(fam[2].k == 26);
  CHECK(fam[0].r_end == doctest::Approx(node_radius(16, 0.5)));
  CHECK(closed_supports_disjoint(fam));
  CHECK(fam[1].r_begin - fam[0].r_end == doctest::Approx(kPi / 0.5));
  // Spacing 4 p0 shares an endpoint.
  const std::vector<FamilyMember> touching = {{8, node_radius(8, 0.5), node_radius(16, 0.5)},
                                              {16, node_radius(16, 0.5), node_radius(24, 0.5)}};
  CHECK_FALSE(closed_supports_disjoint(touching));
  CHECK_THROWS_AS(disjoint_family(8, 0, 3, 0.5), std::invalid_argument);
}

TEST_CASE("residual sweep") {
  const auto model = warp::builtin_model("exp-model(2, 1, 0.5)");
  SweepOptions opt;
  opt.c = 1;
  opt.threads = 2;
  const SweepResult res = residual_sweep(model, {0.3, 1.0}, {4, 8, 16}, 4, opt);
  REQUIRE(res.rows.size() == 6);
  CHECK(res.rows[0].lambda == 0.3);
  CHECK(res.rows[0].report.k == 4);
  CHECK(res.rows[5].report.k == 16);
  REQUIRE(res.summaries.size() == 2);
  CHECK(res.summaries[0].strictly_decreasing);
  CHECK(res.summaries[1].strictly_decreasing);
  CHECK(res.summaries[0].first_k_within_epsilon.value_or(-1) == 4);

  // Serial and parallel runs agree exactly.
  opt.threads = 1;
  const SweepResult serial = residual_sweep(model, {0.3, 1.0}, {4, 8, 16}, 4, opt);
  for (std::size_t i = 0; i < res.rows.size(); ++i) CHECK(serial.rows[i].report.ratio == res.rows[i].report.ratio);

  CHECK(residual_sweep(model, {}, {8}, 4, opt).rows.empty());
  CHECK_THROWS_AS(residual_sweep(model, {0.1}, {8}, 4, opt), PreconditionError);
}
