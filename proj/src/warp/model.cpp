#include "weylspec/warp/model.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace weylspec::warp {

using numerics::WideReal;

namespace {

std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_number(const std::string& text, std::string_view spec) {
  double v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw std::invalid_argument("builtin model '" + std::string(spec) + "': '" + text + "' is not a number");
  }
  return v;
}

int as_dimension(double v, std::string_view spec) {
  if (v != std::floor(v) || v < 2) {
    throw std::invalid_argument("builtin model '" + std::string(spec) + "': n must be an integer >= 2");
  }
  return static_cast<int>(v);
}

}  // namespace

WideReal ManifoldModel::s_max(WideReal r) const {
  const WideReal s = static_cast<WideReal>(neighborhood.c2) * std::exp(-static_cast<WideReal>(neighborhood.a) * r);
  return std::min(s, std::numbers::pi_v<WideReal>);
}

void ManifoldModel::validate() const {
  if (n < 2) throw std::invalid_argument("model '" + label + "': n must be >= 2");
  if (!(neighborhood.a >= 0)) throw std::invalid_argument("model '" + label + "': a must be >= 0");
  if (!(neighborhood.c2 > 0)) throw std::invalid_argument("model '" + label + "': c2 must be > 0");
  if (!(r_min > 0)) throw std::invalid_argument("model '" + label + "': r_min must be > 0");
  for (WideReal r = r_min; r <= 64; r *= 2) {
    for (WideReal frac : {0.0L, 0.25L, 0.5L, 0.75L, 1.0L}) {
      const WideReal s = frac * s_max(r);
      WideReal value;
      try {
        value = psi(r, s);
      } catch (const WarpDomainError& e) {
        throw std::invalid_argument("model '" + label + "': warp undefined at r = " + num(double(r)) +
                                    ", s = " + num(double(s)) + ": " + e.what());
      }
      if (!(value > 0)) {
        throw std::invalid_argument("model '" + label + "': warp must be positive, got " + num(double(value)) +
                                    " at r = " + num(double(r)) + ", s = " + num(double(s)));
      }
    }
  }
}

ManifoldModel builtin_model(std::string_view spec) {
  const std::string text = trim(spec);
  std::string name = text;
  std::vector<double> args;
  const auto open = text.find('(');
  if (open != std::string::npos) {
    if (text.back() != ')') throw std::invalid_argument("builtin model '" + text + "': missing ')'");
    name = trim(std::string_view(text).substr(0, open));
    const std::string inner = text.substr(open + 1, text.size() - open - 2);
    if (!trim(inner).empty()) {
      std::stringstream ss(inner);
      std::string item;
      while (std::getline(ss, item, ',')) args.push_back(parse_number(trim(item), text));
    }
  }
  auto require = [&](std::size_t lo, std::size_t hi, const char* signature) {
    if (args.size() < lo || args.size() > hi) {
      throw std::invalid_argument("builtin model '" + text + "': expected " + signature);
    }
  };

  ManifoldModel m{2, parse_warp("r"), {}, 0.1, text};
  if (name == "euclidean-cone") {
    require(2, 2, "euclidean-cone(n, c2)");
    m.n = as_dimension(args[0], text);
    m.neighborhood = {0, args[1]};
    m.label = "euclidean-cone(" + num(args[0]) + ", " + num(args[1]) + ")";
  } else if (name == "hyperbolic") {
    require(1, 1, "hyperbolic(n)");
    m.n = as_dimension(args[0], text);
    m.warp = parse_warp("sinh(r)");
    m.neighborhood = {0, std::numbers::pi};
    m.label = "hyperbolic(" + num(args[0]) + ")";
  } else if (name == "exp-model") {
    require(3, 4, "exp-model(n, c, a[, c2])");
    m.n = as_dimension(args[0], text);
    const double c = args[1];
    const double a = args[2];
    const double c2 = args.size() > 3 ? args[3] : 1.0;
    if (!(c > 0)) throw std::invalid_argument("builtin model '" + text + "': c must be > 0");
    if (!(a < c)) throw std::invalid_argument("builtin model '" + text + "': requires c > a");
    m.warp = parse_warp("exp(" + num(c) + "*r)");
    m.neighborhood = {a, c2};
    m.label = "exp-model(" + num(args[0]) + ", " + num(c) + ", " + num(a) + ", " + num(c2) + ")";
  } else if (name == "appendix-surface") {
    require(1, 1, "appendix-surface(a)");
    m.warp = parse_warp("r*exp(r^2*sin(s/2)^2 + r)");
    m.neighborhood = {args[0], 1.0};
    m.label = "appendix-surface(" + num(args[0]) + ")";
  } else {
    throw std::invalid_argument("unknown builtin model '" + name +
                                "' (expected euclidean-cone, hyperbolic, exp-model or appendix-surface)");
  }
  m.validate();
  return m;
}

ManifoldModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("model: expected a JSON object");
  ManifoldModel m{2, parse_warp("r"), {}, 0.1, ""};
  if (doc.contains("builtin")) {
    m = builtin_model(doc.at("builtin").get<std::string>());
  } else {
    for (const char* key : {"n", "warp", "a", "c2"}) {
      if (!doc.contains(key)) throw std::invalid_argument(std::string("model: missing field '") + key + "'");
    }
    m.n = doc.at("n").get<int>();
    m.warp = parse_warp(doc.at("warp").get<std::string>());
    m.neighborhood = {doc.at("a").get<double>(), doc.at("c2").get<double>()};
    m.label = m.warp.to_string();
  }
  if (doc.contains("r_min")) m.r_min = doc.at("r_min").get<double>();
  if (doc.contains("label")) m.label = doc.at("label").get<std::string>();
  m.validate();
  return m;
}

nlohmann::json model_to_json(const ManifoldModel& model) {
  return {{"n", model.n},
          {"warp", model.warp.to_string()},
          {"a", model.neighborhood.a},
          {"c2", model.neighborhood.c2},
          {"r_min", model.r_min},
          {"label", model.label}};
}

ManifoldModel alpha_shifted(const ManifoldModel& model, double alpha) {
  if (!(alpha >= 0)) throw std::invalid_argument("alpha_shifted: alpha must be >= 0");
  auto make = [](auto payload) { return std::make_shared<const Node>(Node{std::move(payload)}); };
  const NodePtr exponent = make(Binary{BinaryOp::mul, make(Number{alpha}), make(Variable{'r'})});
  const NodePtr factor = make(Call{Func::exp, exponent});
  ManifoldModel out = model;
  out.warp = WarpExpr(make(Binary{BinaryOp::mul, factor, model.warp.root_ptr()}));
  out.label = model.label + " shifted by exp(" + num(alpha) + "*r)";
  return out;
}

}  // namespace weylspec::warp
