#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "weylspec/numerics/hyperdual.hpp"

namespace weylspec::warp {

enum class Func { sin, cos, tan, sinh, cosh, tanh, exp, log, sqrt, abs };
enum class BinaryOp { add, sub, mul, div, pow };
enum class ConstantKind { pi, e };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
  double value;
};
struct Variable {
  char name;  ///< 'r' or 's'
};
struct Constant {
  ConstantKind kind;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Func func;
  NodePtr arg;
};

struct Node {
  std::variant<Number, Variable, Constant, Negate, Binary, Call> data;
};

const char* func_name(Func f);

/// Parsed warp-factor expression psi(r, s). Immutable; copies share the tree.
class WarpExpr {
 public:
  explicit WarpExpr(NodePtr root);

  const Node& root() const { return *root_; }
  NodePtr root_ptr() const { return root_; }

  /// Canonical text with the fewest parentheses the grammar needs.
  std::string to_string() const;

  bool depends_on_s() const;

  friend bool operator==(const WarpExpr& a, const WarpExpr& b);

 private:
  NodePtr root_;
};

bool structurally_equal(const Node& a, const Node& b);
std::string serialize(const Node& node);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message);
  std::size_t position() const noexcept { return position_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t position_;
  std::string message_;
};

/// Raised when an expression is undefined at the evaluation point; carries the
/// offending subexpression in canonical form.
class WarpDomainError : public std::domain_error {
 public:
  WarpDomainError(const std::string& reason, std::string subexpression);
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

/// Parses the warp DSL:
///   expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
///   factor := '-'? power ; power := atom ('^' factor)? ;
///   atom := number | 'r' | 's' | 'pi' | 'e' | ident '(' expr ')' | '(' expr ')'
/// Positions in errors are 0-based character offsets.
WarpExpr parse_warp(std::string_view text);

using Jet = numerics::HyperDual<numerics::WideReal>;

/// psi and its first and second partials at (r, s).
struct WarpJet {
  numerics::WideReal psi;
  numerics::WideReal psi_r;
  numerics::WideReal psi_s;
  numerics::WideReal psi_rr;
  numerics::WideReal psi_rs;
  numerics::WideReal psi_ss;
};

Jet eval_jet(const WarpExpr& expr, numerics::WideReal r, numerics::WideReal s);
WarpJet eval_warp(const WarpExpr& expr, numerics::WideReal r, numerics::WideReal s);

/// Value only, no derivative propagation.
numerics::WideReal eval_value(const WarpExpr& expr, numerics::WideReal r, numerics::WideReal s);

}  // namespace weylspec::warp
