#include "weylspec/warp/expr.hpp"

#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace weylspec::warp {

using numerics::WideReal;

namespace {

constexpr std::array<std::pair<std::string_view, Func>, 10> kFunctions = {{
    {"sin", Func::sin},
    {"cos", Func::cos},
    {"tan", Func::tan},
    {"sinh", Func::sinh},
    {"cosh", Func::cosh},
    {"tanh", Func::tanh},
    {"exp", Func::exp},
    {"log", Func::log},
    {"sqrt", Func::sqrt},
    {"abs", Func::abs},
}};

std::optional<Func> lookup_function(std::string_view name) {
  for (const auto& [n, f] : kFunctions) {
    if (n == name) return f;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- lexer

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
  Tok kind;
  std::size_t pos;
  std::string_view text;
  double number = 0;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto digit = [&](std::size_t k) { return k < src.size() && std::isdigit(static_cast<unsigned char>(src[k])); };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && digit(i + 1))) {
      while (digit(i)) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (digit(i)) ++i;
      }
      // An exponent only when digits follow, so "2e" stays a syntax error at 'e'.
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t k = i + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (digit(k)) {
          i = k;
          while (digit(i)) ++i;
        }
      }
      Token t{Tok::number, start, src.substr(start, i - start)};
      const std::string copy(t.text);
      char* end = nullptr;
      t.number = std::strtod(copy.c_str(), &end);
      if (!std::isfinite(t.number)) throw ParseError(start, "numeric literal out of range");
      out.push_back(t);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({Tok::ident, start, src.substr(start, i - start)});
      continue;
    }
    Tok kind;
    switch (c) {
      case '+': kind = Tok::plus; break;
      case '-': kind = Tok::minus; break;
      case '*': kind = Tok::star; break;
      case '/': kind = Tok::slash; break;
      case '^': kind = Tok::caret; break;
      case '(': kind = Tok::lparen; break;
      case ')': kind = Tok::rparen; break;
      case ',': kind = Tok::comma; break;
      default: throw ParseError(start, std::string("unexpected character '") + c + "'");
    }
    out.push_back({kind, start, src.substr(start, 1)});
    ++i;
  }
  out.push_back({Tok::end, src.size(), {}});
  return out;
}

// ---------------------------------------------------------------- parser

NodePtr make(auto&& payload) { return std::make_shared<const Node>(Node{std::forward<decltype(payload)>(payload)}); }

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  NodePtr parse() {
    NodePtr e = expr();
    const Token& t = peek();
    if (t.kind == Tok::rparen) throw ParseError(t.pos, "unbalanced ')'");
    if (t.kind != Tok::end) throw ParseError(t.pos, "unexpected '" + std::string(t.text) + "'");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  NodePtr expr() {
    NodePtr lhs = term();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      const BinaryOp op = next().kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
      lhs = make(Binary{op, lhs, term()});
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = factor();
    while (peek().kind == Tok::star || peek().kind == Tok::slash) {
      const BinaryOp op = next().kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
      lhs = make(Binary{op, lhs, factor()});
    }
    return lhs;
  }

  NodePtr factor() {
    if (peek().kind == Tok::minus) {
      next();
      return make(Negate{power()});
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (peek().kind == Tok::caret) {
      next();
      return make(Binary{BinaryOp::pow, base, factor()});
    }
    return base;
  }

  NodePtr atom() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::number: return make(Number{t.number});
      case Tok::lparen: {
        NodePtr inner = expr();
        expect_close(t.pos);
        return inner;
      }
      case Tok::ident: return identifier(t);
      case Tok::end: throw ParseError(t.pos, "unexpected end of input, expected an expression");
      case Tok::rparen: throw ParseError(t.pos, "unbalanced ')'");
      default: throw ParseError(t.pos, "unexpected '" + std::string(t.text) + "', expected an expression");
    }
  }

  NodePtr identifier(const Token& t) {
    const auto func = lookup_function(t.text);
    if (peek().kind == Tok::lparen) {
      if (!func) throw ParseError(t.pos, "unknown function '" + std::string(t.text) + "'");
      const Token& open = next();
      if (peek().kind == Tok::rparen) {
        throw ParseError(peek().pos, "function '" + std::string(t.text) + "' takes exactly one argument");
      }
      NodePtr arg = expr();
      if (peek().kind == Tok::comma) {
        throw ParseError(peek().pos, "function '" + std::string(t.text) + "' takes exactly one argument");
      }
      expect_close(open.pos);
      return make(Call{*func, arg});
    }
    if (t.text == "r" || t.text == "s") return make(Variable{t.text[0]});
    if (t.text == "pi") return make(Constant{ConstantKind::pi});
    if (t.text == "e") return make(Constant{ConstantKind::e});
    if (func) throw ParseError(peek().pos, "expected '(' after function '" + std::string(t.text) + "'");
    throw ParseError(t.pos, "unknown identifier '" + std::string(t.text) + "'");
  }

  void expect_close(std::size_t open_pos) {
    const Token& t = peek();
    if (t.kind == Tok::rparen) {
      next();
      return;
    }
    if (t.kind == Tok::end) {
      throw ParseError(t.pos, "unbalanced '(' opened at position " + std::to_string(open_pos));
    }
    throw ParseError(t.pos, "expected ')' but found '" + std::string(t.text) + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- serializer

// Grammar levels: 1 expr, 2 term, 3 factor, 4 power, 5 atom.
int level(const Node& n) {
  return std::visit(
      [](const auto& v) -> int {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Number>) return v.value < 0 || std::signbit(v.value) ? 3 : 5;
        if constexpr (std::is_same_v<V, Negate>) return 3;
        if constexpr (std::is_same_v<V, Binary>) {
          switch (v.op) {
            case BinaryOp::add:
            case BinaryOp::sub: return 1;
            case BinaryOp::mul:
            case BinaryOp::div: return 2;
            case BinaryOp::pow: return 4;
          }
        }
        return 5;
      },
      n.data);
}

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string emit(const Node& n, int min_level) {
  std::string body = std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Number>) {
          return format_number(v.value);
        } else if constexpr (std::is_same_v<V, Variable>) {
          return std::string(1, v.name);
        } else if constexpr (std::is_same_v<V, Constant>) {
          return v.kind == ConstantKind::pi ? "pi" : "e";
        } else if constexpr (std::is_same_v<V, Negate>) {
          return "-" + emit(*v.operand, 4);
        } else if constexpr (std::is_same_v<V, Call>) {
          return std::string(func_name(v.func)) + "(" + emit(*v.arg, 1) + ")";
        } else {
          switch (v.op) {
            case BinaryOp::add: return emit(*v.lhs, 1) + " + " + emit(*v.rhs, 2);
            case BinaryOp::sub: return emit(*v.lhs, 1) + " - " + emit(*v.rhs, 2);
            case BinaryOp::mul: return emit(*v.lhs, 2) + "*" + emit(*v.rhs, 3);
            case BinaryOp::div: return emit(*v.lhs, 2) + "/" + emit(*v.rhs, 3);
            case BinaryOp::pow: return emit(*v.lhs, 5) + "^" + emit(*v.rhs, 3);
          }
          return {};
        }
      },
      n.data);
  if (level(n) < min_level) return "(" + body + ")";
  return body;
}

// ---------------------------------------------------------------- evaluation

template <typename T>
struct Evaluator;

template <>
struct Evaluator<Jet> {
  static Jet lift(WideReal x) { return Jet::constant(x); }
  static WideReal value(const Jet& x) { return x.value; }
  static bool finite(const Jet& x) {
    return std::isfinite(x.value) && std::isfinite(x.d_r) && std::isfinite(x.d_s) && std::isfinite(x.d_rr) &&
           std::isfinite(x.d_rs) && std::isfinite(x.d_ss);
  }
};

template <>
struct Evaluator<WideReal> {
  static WideReal lift(WideReal x) { return x; }
  static WideReal value(WideReal x) { return x; }
  static bool finite(WideReal x) { return std::isfinite(x); }
};

template <typename T>
T evaluate(const Node& n, const T& r, const T& s) {
  using E = Evaluator<T>;
  auto fail = [&](const std::string& why) -> T { throw WarpDomainError(why, serialize(n)); };
  T out = std::visit(
      [&](const auto& v) -> T {
        using V = std::decay_t<decltype(v)>;
        using std::abs;
        using std::cos;
        using std::cosh;
        using std::exp;
        using std::log;
        using std::sin;
        using std::sinh;
        using std::sqrt;
        using std::tan;
        using std::tanh;
        using numerics::abs;
        using numerics::cos;
        using numerics::cosh;
        using numerics::exp;
        using numerics::log;
        using numerics::sin;
        using numerics::sinh;
        using numerics::sqrt;
        using numerics::tan;
        using numerics::tanh;
        if constexpr (std::is_same_v<V, Number>) {
          return E::lift(static_cast<WideReal>(v.value));
        } else if constexpr (std::is_same_v<V, Variable>) {
          return v.name == 'r' ? r : s;
        } else if constexpr (std::is_same_v<V, Constant>) {
          return E::lift(v.kind == ConstantKind::pi ? std::numbers::pi_v<WideReal> : std::numbers::e_v<WideReal>);
        } else if constexpr (std::is_same_v<V, Negate>) {
          return -evaluate(*v.operand, r, s);
        } else if constexpr (std::is_same_v<V, Call>) {
          const T x = evaluate(*v.arg, r, s);
          const WideReal xv = E::value(x);
          switch (v.func) {
            case Func::sin: return sin(x);
            case Func::cos: return cos(x);
            case Func::tan: return tan(x);
            case Func::sinh: return sinh(x);
            case Func::cosh: return cosh(x);
            case Func::tanh: return tanh(x);
            case Func::exp: return exp(x);
            case Func::log:
              if (!(xv > 0)) return fail("log of non-positive value");
              return log(x);
            case Func::sqrt:
              if (!(xv > 0)) return fail("sqrt of non-positive value");
              return sqrt(x);
            case Func::abs: return abs(x);
          }
          return x;
        } else {
          const T a = evaluate(*v.lhs, r, s);
          switch (v.op) {
            case BinaryOp::add: return a + evaluate(*v.rhs, r, s);
            case BinaryOp::sub: return a - evaluate(*v.rhs, r, s);
            case BinaryOp::mul: return a * evaluate(*v.rhs, r, s);
            case BinaryOp::div: {
              const T b = evaluate(*v.rhs, r, s);
              if (E::value(b) == 0) return fail("division by zero");
              return a / b;
            }
            case BinaryOp::pow: {
              // Constant integer exponents are valid for any base sign.
              if (const auto* num = std::get_if<Number>(&v.rhs->data)) {
                const double ex = num->value;
                if (ex == std::nearbyint(ex) && std::abs(ex) <= 1024) {
                  if (ex < 0 && E::value(a) == 0) return fail("zero raised to a negative power");
                  if constexpr (std::is_same_v<T, Jet>) {
                    return numerics::pow_int(a, static_cast<int>(ex));
                  } else {
                    return std::pow(a, static_cast<WideReal>(ex));
                  }
                }
              }
              const T b = evaluate(*v.rhs, r, s);
              if (!(E::value(a) > 0)) return fail("non-integer power of non-positive base");
              if constexpr (std::is_same_v<T, Jet>) {
                return numerics::pow(a, b);
              } else {
                return std::pow(a, b);
              }
            }
          }
          return a;
        }
      },
      n.data);
  if (!E::finite(out)) throw WarpDomainError("non-finite value", serialize(n));
  return out;
}

bool mentions_s(const Node& n) {
  return std::visit(
      [](const auto& v) -> bool {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Variable>) return v.name == 's';
        if constexpr (std::is_same_v<V, Negate>) return mentions_s(*v.operand);
        if constexpr (std::is_same_v<V, Call>) return mentions_s(*v.arg);
        if constexpr (std::is_same_v<V, Binary>) return mentions_s(*v.lhs) || mentions_s(*v.rhs);
        return false;
      },
      n.data);
}

}  // namespace

const char* func_name(Func f) {
  for (const auto& [n, g] : kFunctions) {
    if (g == f) return n.data();
  }
  return "?";
}

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("parse error at position " + std::to_string(position) + ": " + message),
      position_(position),
      message_(message) {}

WarpDomainError::WarpDomainError(const std::string& reason, std::string subexpression)
    : std::domain_error(reason + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

WarpExpr::WarpExpr(NodePtr root) : root_(std::move(root)) {
  if (!root_) throw std::invalid_argument("WarpExpr: null expression");
}

std::string WarpExpr::to_string() const { return serialize(*root_); }

bool WarpExpr::depends_on_s() const { return mentions_s(*root_); }

bool operator==(const WarpExpr& a, const WarpExpr& b) { return structurally_equal(*a.root_, *b.root_); }

bool structurally_equal(const Node& a, const Node& b) {
  if (a.data.index() != b.data.index()) return false;
  return std::visit(
      [&b](const auto& x) -> bool {
        using V = std::decay_t<decltype(x)>;
        const V& y = std::get<V>(b.data);
        if constexpr (std::is_same_v<V, Number>) return x.value == y.value;
        if constexpr (std::is_same_v<V, Variable>) return x.name == y.name;
        if constexpr (std::is_same_v<V, Constant>) return x.kind == y.kind;
        if constexpr (std::is_same_v<V, Negate>) return structurally_equal(*x.operand, *y.operand);
        if constexpr (std::is_same_v<V, Call>) return x.func == y.func && structurally_equal(*x.arg, *y.arg);
        if constexpr (std::is_same_v<V, Binary>) {
          return x.op == y.op && structurally_equal(*x.lhs, *y.lhs) && structurally_equal(*x.rhs, *y.rhs);
        }
        return false;
      },
      a.data);
}

std::string serialize(const Node& node) { return emit(node, 1); }

WarpExpr parse_warp(std::string_view text) {
  bool blank = true;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
  }
  if (blank) throw ParseError(0, "empty expression");
  return WarpExpr(Parser(tokenize(text)).parse());
}

Jet eval_jet(const WarpExpr& expr, WideReal r, WideReal s) {
  return evaluate<Jet>(expr.root(), Jet::variable_r(r), Jet::variable_s(s));
}

WarpJet eval_warp(const WarpExpr& expr, WideReal r, WideReal s) {
  const Jet j = eval_jet(expr, r, s);
  return {j.value, j.d_r, j.d_s, j.d_rr, j.d_rs, j.d_ss};
}

WideReal eval_value(const WarpExpr& expr, WideReal r, WideReal s) {
  return evaluate<WideReal>(expr.root(), r, s);
}

}  // namespace weylspec::warp
