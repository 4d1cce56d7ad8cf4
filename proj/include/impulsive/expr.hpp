#pragma once

// Arithmetic expressions over the variables t, s, x1..xm, used for the
// right-hand side f, the impulse map h, and sequence lift maps in configs.
//
// Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | power
//   power  := atom ("^" factor)?
//   atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//
// So "^" binds tightest and is right-associative, unary minus sits between
// "^" and "*": -x^2 = -(x^2), 2^-1 = 0.5.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace impulsive {

enum class Func : std::uint8_t { Sin, Cos, Tan, Tanh, Arctan, Exp, Ln, Abs, Sqrt };
enum class BinOp : std::uint8_t { Add, Sub, Mul, Div, Pow };

/// Values bound to the free variables during evaluation. Unset optionals and
/// x indices past the end of `x` are unbound.
struct Env {
  std::optional<double> t;
  std::optional<double> s;
  std::span<const double> x;
};

/// Which variables an expression mentions.
struct VariableUsage {
  bool uses_t = false;
  bool uses_s = false;
  int max_x = 0;  ///< largest j such that xj appears, 0 if none
};

class Expression {
 public:
  enum class Kind : std::uint8_t { Number, VarT, VarS, VarX, Neg, Binary, Call };

  struct Node {
    Kind kind = Kind::Number;
    BinOp op = BinOp::Add;
    Func func = Func::Sin;
    double value = 0.0;   // Number
    int index = 0;        // VarX: 1-based component
    int lhs = -1;         // Neg / Call argument, Binary left
    int rhs = -1;         // Binary right
    friend bool operator==(const Node&, const Node&) = default;
  };

  Expression() = default;

  double eval(const Env& env) const;
  double eval(const std::map<std::string, double>& env) const;

  /// Fully parenthesized text that parses back to an identical tree.
  std::string to_string() const;

  VariableUsage variables() const;
  int depth() const;
  bool empty() const noexcept { return nodes_.empty(); }

  /// Nodes in post-order; the root is the last entry.
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  friend bool operator==(const Expression& a, const Expression& b) { return a.nodes_ == b.nodes_; }

 private:
  friend class ExpressionBuilder;
  std::vector<Node> nodes_;
};

inline constexpr std::size_t kMaxExpressionBytes = 64 * 1024;
inline constexpr int kMaxExpressionDepth = 256;

/// Parses `text`. Throws ParseError on syntax errors, unknown function or
/// variable names, and trees deeper than kMaxExpressionDepth.
Expression parse(std::string_view text);

/// Throws DomainError when `e` references a variable outside the allowed
/// environment. `what` names the expression in the message.
void require_variables(const Expression& e, bool allow_t, bool allow_s, int max_x,
                       const std::string& what);

const char* func_name(Func f);

}  // namespace impulsive
