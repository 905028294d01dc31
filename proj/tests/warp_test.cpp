#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "weylspec/warp/expr.hpp"
#include "weylspec/warp/model.hpp"

using namespace weylspec::warp;
using weylspec::numerics::WideReal;

namespace {

std::size_t error_position(const std::string& text) {
  try {
    parse_warp(text);
  } catch (const ParseError& e) {
    return e.position();
  }
  FAIL("expected a parse error for '" << text << "'");
  return 0;
}

}  // namespace

TEST_CASE("parse builds the expected trees") {
  const WarpExpr e = parse_warp("sinh(r)");
  const auto* call = std::get_if<Call>(&e.root().data);
  REQUIRE(call != nullptr);
  CHECK(call->func == Func::sinh);
  const auto* var = std::get_if<Variable>(&call->arg->data);
  REQUIRE(var != nullptr);
  CHECK(var->name == 'r');

  // ^ binds tighter than unary minus and is right associative.
  CHECK(parse_warp("-r^2") == parse_warp("-(r^2)"));
  CHECK(parse_warp("2^3^2") == parse_warp("2^(3^2)"));
  CHECK(parse_warp("1 - 2 - 3") == parse_warp("(1 - 2) - 3"));
  CHECK(parse_warp("r/2*s") == parse_warp("(r/2)*s"));
  CHECK(parse_warp("r^-2") == parse_warp("r^(-2)"));
  CHECK_FALSE(parse_warp("r + s") == parse_warp("s + r"));
}

TEST_CASE("parse errors carry positions") {
  CHECK(error_position("sin(") == 4);
  CHECK(error_position("(r") == 2);
  CHECK(error_position("r)") == 1);
  CHECK(error_position("r + x") == 4);
  CHECK(error_position("foo(r)") == 0);
  CHECK(error_position("sin(r, s)") == 5);
  CHECK(error_position("sin()") == 4);
  CHECK(error_position("r # 2") == 2);
  CHECK(error_position("2e") == 1);
  CHECK(error_position("r +") == 3);
  CHECK(error_position("exp") == 3);
  CHECK(error_position("") == 0);
  CHECK(error_position("--r") == 1);
  CHECK_THROWS_WITH(parse_warp("r + x"), doctest::Contains("unknown identifier"));
  CHECK_THROWS_WITH(parse_warp("sin(r, s)"), doctest::Contains("exactly one argument"));
}

TEST_CASE("serialization round trip over a corpus") {
  const std::vector<std::string> corpus = {
      "r",
      "s",
      "pi",
      "e",
      "1.5",
      "2.5e-3",
      "1e10",
      ".5*r",
      "sinh(r)",
      "r*exp(r^2*sin(s/2)^2 + r)",
      "exp(0.05*r)*r",
      "-r",
      "-(-r)",
      "r - -s",
      "-r^2",
      "(-r)^2",
      "2^3^2",
      "(2^3)^2",
      "r^-2",
      "r^(-s)",
      "1 - (2 - 3)",
      "1 - 2 - 3",
      "r/(s*2)",
      "r/s/2",
      "r*(s + 1)",
      "(r + s)*(r - s)",
      "sqrt(abs(r - s))",
      "log(cosh(r)) + tan(s)",
      "tanh(r)/cos(s)",
      "exp(-r)",
      "-(r + s)",
      "-(r*s)",
      "r*-s",
      "sin(r)^2 + cos(r)^2",
      "2^-r^2",
      "r*(2 + sin(s))",
      "(((r)))",
      "1/3",
  };
  CHECK(corpus.size() >= 30);
  for (const auto& text : corpus) {
    CAPTURE(text);
    const WarpExpr first = parse_warp(text);
    const std::string printed = first.to_string();
    CAPTURE(printed);
    const WarpExpr second = parse_warp(printed);
    CHECK(first == second);
    CHECK(second.to_string() == printed);
  }
  CHECK(parse_warp("(r + s)*2").to_string() == "(r + s)*2");
  CHECK(parse_warp("-(-r)").to_string() == "-(-r)");
}

TEST_CASE("evaluation examples") {
  const WarpExpr appendix = parse_warp("r*exp(r^2*sin(s/2)^2 + r)");
  const WarpJet j = eval_warp(appendix, 2, 0);
  CHECK(static_cast<double>(j.psi) == doctest::Approx(2 * std::exp(2.0)).epsilon(1e-15));
  CHECK(j.psi_s == 0);

  const WarpJet ex = eval_warp(parse_warp("exp(r)"), 1, 0);
  CHECK(static_cast<double>(ex.psi) == doctest::Approx(std::exp(1.0)));
  CHECK(static_cast<double>(ex.psi_r) == doctest::Approx(std::exp(1.0)));
  CHECK(static_cast<double>(ex.psi_rr) == doctest::Approx(std::exp(1.0)));
  CHECK(ex.psi_s == 0);

  for (WideReal r : {1.0L, 2.0L, 5.0L, 10.0L}) {
    const WarpJet a = eval_warp(appendix, r, 0);
    CHECK(std::abs(static_cast<double>(a.psi_rr / a.psi - (1 + 2 / r))) <= 1e-14);
  }
  // Values beyond double range stay finite in the wide type.
  const WarpJet big = eval_warp(parse_warp("exp(r)"), 1500, 0);
  CHECK(std::isfinite(big.psi));
  CHECK(big.psi > 1e600L);
}

TEST_CASE("domain errors name the offending subexpression") {
  try {
    eval_warp(parse_warp("r + 1/(s - 1)"), 1, 1);
    FAIL("expected domain error");
  } catch (const WarpDomainError& e) {
    CHECK(e.subexpression() == "1/(s - 1)");
  }
  CHECK_THROWS_AS(eval_warp(parse_warp("log(s)"), 1, 0), WarpDomainError);
  CHECK_THROWS_AS(eval_warp(parse_warp("sqrt(s - 1)"), 1, 0), WarpDomainError);
  CHECK_THROWS_AS(eval_warp(parse_warp("(s - 1)^0.5"), 1, 0), WarpDomainError);
  CHECK_THROWS_AS(eval_warp(parse_warp("exp(exp(r))"), 100, 0), WarpDomainError);
  // Integer powers accept negative bases.
  CHECK(static_cast<double>(eval_warp(parse_warp("(s - 2)^3"), 0, 0).psi) == doctest::Approx(-8));
}

TEST_CASE("hyperdual jets of the builtin models match central differences") {
  const std::vector<std::string> specs = {"euclidean-cone(3, 0.5)", "hyperbolic(2)", "exp-model(2, 1, 0.5)",
                                          "appendix-surface(1)", "exp-model(4, 0.7, 0.2, 0.8)"};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  const WideReal h = 1e-5L;
  for (const auto& spec : specs) {
    const ManifoldModel m = builtin_model(spec);
    for (int i = 0; i < 100; ++i) {
      const WideReal r = 0.5L + 7 * u(rng);
      const WideReal s = (0.05L + 0.9L * u(rng)) * m.s_max(r);
      const WarpJet j = m.jet(r, s);
      auto f = [&](WideReal rr, WideReal ss) { return m.psi(rr, ss); };
      const WideReal fr = (f(r + h, s) - f(r - h, s)) / (2 * h);
      const WideReal fs = (f(r, s + h) - f(r, s - h)) / (2 * h);
      const WideReal frr = (f(r + h, s) - 2 * f(r, s) + f(r - h, s)) / (h * h);
      auto close = [&](WideReal ad, WideReal fd) {
        return std::abs(ad - fd) <= 1e-5L * std::max(std::abs(ad), 1e-3L * j.psi);
      };
      CAPTURE(spec);
      CAPTURE(static_cast<double>(r));
      CHECK(close(j.psi_r, fr));
      CHECK(close(j.psi_s, fs));
      CHECK(close(j.psi_rr, frr));
    }
  }
}

TEST_CASE("appendix angular identity psi_s/psi = r^2 g'(s)") {
  const ManifoldModel m = builtin_model("appendix-surface(1)");
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const WideReal r = 0.2L + 20 * u(rng);
    const WideReal s = u(rng) * m.s_max(r);
    const WarpJet j = m.jet(r, s);
    const WideReal g1 = std::sin(s) / 2;  // g = sin^2(s/2)
    CHECK(std::abs(static_cast<double>(j.psi_s / j.psi - r * r * g1)) <= 1e-10 * std::max(1.0L, r * r * g1));
  }
}

TEST_CASE("builtin models") {
  const ManifoldModel cone = builtin_model("euclidean-cone(3, 0.5)");
  CHECK(cone.n == 3);
  CHECK(cone.warp == parse_warp("r"));
  CHECK(cone.neighborhood.a == 0);
  CHECK(cone.neighborhood.c2 == 0.5);

  const ManifoldModel hyp = builtin_model("hyperbolic(2)");
  CHECK(hyp.warp == parse_warp("sinh(r)"));

  const ManifoldModel ex = builtin_model("exp-model(2, 1, 0.5)");
  CHECK(ex.neighborhood.a == 0.5);
  CHECK(ex.neighborhood.c2 == 1);
  CHECK(static_cast<double>(ex.psi(2, 0)) == doctest::Approx(std::exp(2.0)));

  CHECK_THROWS_WITH(builtin_model("exp-model(2, 1, 1.5)"), doctest::Contains("requires c > a"));
  CHECK_THROWS_AS(builtin_model("sphere(2)"), std::invalid_argument);
  CHECK_THROWS_AS(builtin_model("hyperbolic(1)"), std::invalid_argument);
  CHECK_THROWS_AS(builtin_model("euclidean-cone(2)"), std::invalid_argument);

  const ManifoldModel app = builtin_model("appendix-surface(1)");
  CHECK(app.n == 2);
  CHECK(static_cast<double>(app.s_max(2)) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("model documents") {
  const auto doc = nlohmann::json::parse(R"j({"n": 3, "warp": "r*(2 + sin(s))", "a": 0, "c2": 0.4,
                                            "r_min": 0.5, "label": "wobbly"})j");
  const ManifoldModel m = model_from_json(doc);
  CHECK(m.n == 3);
  CHECK(m.r_min == 0.5);
  CHECK(m.label == "wobbly");
  const ManifoldModel back = model_from_json(model_to_json(m));
  CHECK(back.warp == m.warp);
  CHECK(back.neighborhood.c2 == 0.4);

  const ManifoldModel b = model_from_json(nlohmann::json::parse(R"j({"builtin": "hyperbolic(3)", "r_min": 0.2})j"));
  CHECK(b.n == 3);
  CHECK(b.r_min == 0.2);
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"j({"n": 2, "warp": "r"})j")), std::invalid_argument);
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"j({"n": 2, "warp": "r - 5", "a": 0, "c2": 1})j")),
                  std::invalid_argument);
}

TEST_CASE("alpha shift multiplies the warp by exp(alpha r)") {
  const ManifoldModel cone = builtin_model("euclidean-cone(2, 0.5)");
  const ManifoldModel shifted = alpha_shifted(cone, 0.05);
  for (WideReal r : {1.0L, 10.0L, 100.0L}) {
    CHECK(static_cast<double>(shifted.psi(r, 0.1L) / (std::exp(0.05L * r) * r)) == doctest::Approx(1.0));
  }
  CHECK(parse_warp(shifted.warp.to_string()) == shifted.warp);
  CHECK_FALSE(cone.warp.depends_on_s());
  CHECK(builtin_model("appendix-surface(1)").warp.depends_on_s());
}
