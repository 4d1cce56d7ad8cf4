#include "impulsive/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "impulsive/errors.hpp"

namespace impulsive {

namespace {

struct FuncEntry {
  const char* name;
  Func func;
};

constexpr std::array<FuncEntry, 9> kFunctions = {{{"sin", Func::Sin},
                                                  {"cos", Func::Cos},
                                                  {"tan", Func::Tan},
                                                  {"tanh", Func::Tanh},
                                                  {"arctan", Func::Arctan},
                                                  {"exp", Func::Exp},
                                                  {"ln", Func::Ln},
                                                  {"abs", Func::Abs},
                                                  {"sqrt", Func::Sqrt}}};

double apply_func(Func f, double v) {
  switch (f) {
    case Func::Sin: return std::sin(v);
    case Func::Cos: return std::cos(v);
    case Func::Tan: return std::tan(v);
    case Func::Tanh: return std::tanh(v);
    case Func::Arctan: return std::atan(v);
    case Func::Exp: return std::exp(v);
    case Func::Ln: return std::log(v);
    case Func::Abs: return std::abs(v);
    case Func::Sqrt: return std::sqrt(v);
  }
  return v;
}

double apply_binop(BinOp op, double a, double b) {
  switch (op) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Mul: return a * b;
    case BinOp::Div: return a / b;
    case BinOp::Pow: return std::pow(a, b);
  }
  return a;
}

char binop_char(BinOp op) {
  switch (op) {
    case BinOp::Add: return '+';
    case BinOp::Sub: return '-';
    case BinOp::Mul: return '*';
    case BinOp::Div: return '/';
    case BinOp::Pow: return '^';
  }
  return '?';
}

}  // namespace

const char* func_name(Func f) {
  for (const auto& e : kFunctions)
    if (e.func == f) return e.name;
  return "?";
}

// Recursive-descent parser that appends nodes in post-order.
class ExpressionBuilder {
 public:
  explicit ExpressionBuilder(std::string_view text) : text_(text) {}

  Expression build() {
    if (text_.size() > kMaxExpressionBytes) throw ParseError("expression longer than 64 KiB", 0);
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    const int root = parse_expr();
    skip_ws();
    if (pos_ < text_.size())
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    (void)root;
    if (out_.depth() > kMaxExpressionDepth) throw ParseError("expression nesting too deep", 0);
    return std::move(out_);
  }

 private:
  struct DepthGuard {
    explicit DepthGuard(ExpressionBuilder& b) : b_(b) {
      if (++b_.depth_ > kMaxExpressionDepth)
        throw ParseError("expression nesting too deep", b_.pos_);
    }
    ~DepthGuard() { --b_.depth_; }
    ExpressionBuilder& b_;
  };

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int push(Expression::Node n) {
    out_.nodes_.push_back(n);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int binary(BinOp op, int lhs, int rhs) {
    Expression::Node n;
    n.kind = Expression::Kind::Binary;
    n.op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    return push(n);
  }

  int parse_expr() {
    DepthGuard g(*this);
    int lhs = parse_term();
    while (true) {
      if (accept('+')) {
        lhs = binary(BinOp::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = binary(BinOp::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    DepthGuard g(*this);
    int lhs = parse_factor();
    while (true) {
      if (accept('*')) {
        lhs = binary(BinOp::Mul, lhs, parse_factor());
      } else if (accept('/')) {
        lhs = binary(BinOp::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  int parse_factor() {
    DepthGuard g(*this);
    if (accept('-')) {
      const int arg = parse_factor();
      Expression::Node n;
      n.kind = Expression::Kind::Neg;
      n.lhs = arg;
      return push(n);
    }
    return parse_power();
  }

  int parse_power() {
    DepthGuard g(*this);
    const int base = parse_atom();
    if (accept('^')) return binary(BinOp::Pow, base, parse_factor());
    return base;
  }

  int parse_atom() {
    DepthGuard g(*this);
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  int parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t nd = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // "2e" is 2 followed by identifier e
    }
    const std::string literal(text_.substr(start, pos_ - start));
    errno = 0;
    const double v = std::strtod(literal.c_str(), nullptr);
    if (!std::isfinite(v) || errno == ERANGE) {
      if (!(std::isfinite(v) && v == 0.0)) throw ParseError("number out of range", start);
    }
    Expression::Node n;
    n.kind = Expression::Kind::Number;
    n.value = v;
    return push(n);
  }

  int parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const FuncEntry* entry = nullptr;
      for (const auto& e : kFunctions)
        if (name == e.name) entry = &e;
      if (!entry) throw ParseError("unknown function '" + std::string(name) + "'", start);
      ++pos_;
      const int arg = parse_expr();
      if (!accept(')')) throw ParseError("expected ')' after function argument", pos_);
      Expression::Node n;
      n.kind = Expression::Kind::Call;
      n.func = entry->func;
      n.lhs = arg;
      return push(n);
    }
    Expression::Node n;
    if (name == "t") {
      n.kind = Expression::Kind::VarT;
    } else if (name == "s") {
      n.kind = Expression::Kind::VarS;
    } else if (name.size() >= 2 && name[0] == 'x' && name[1] != '0' &&
               name.find_first_not_of("0123456789", 1) == std::string_view::npos &&
               name.size() <= 4) {
      n.kind = Expression::Kind::VarX;
      n.index = std::atoi(std::string(name.substr(1)).c_str());
    } else {
      throw ParseError("unknown variable '" + std::string(name) + "'", start);
    }
    return push(n);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  Expression out_;
};

Expression parse(std::string_view text) { return ExpressionBuilder(text).build(); }

double Expression::eval(const Env& env) const {
  if (nodes_.empty()) throw EvalError("empty expression");
  // Post-order evaluation on a fixed stack; height is bounded by the depth cap.
  std::array<double, kMaxExpressionDepth + 8> stack;
  std::size_t sp = 0;
  for (const Node& n : nodes_) {
    double v = 0;
    switch (n.kind) {
      case Kind::Number: v = n.value; break;
      case Kind::VarT:
        if (!env.t) throw EvalError("unbound variable 't'");
        v = *env.t;
        break;
      case Kind::VarS:
        if (!env.s) throw EvalError("unbound variable 's'");
        v = *env.s;
        break;
      case Kind::VarX:
        if (n.index < 1 || static_cast<std::size_t>(n.index) > env.x.size())
          throw EvalError("unbound variable 'x" + std::to_string(n.index) + "'");
        v = env.x[static_cast<std::size_t>(n.index - 1)];
        break;
      case Kind::Neg: v = -stack[--sp]; break;
      case Kind::Call: v = apply_func(n.func, stack[--sp]); break;
      case Kind::Binary: {
        const double b = stack[--sp];
        const double a = stack[--sp];
        v = apply_binop(n.op, a, b);
        break;
      }
    }
    if (!std::isfinite(v)) {
      if (n.kind == Kind::Binary && n.op == BinOp::Div)
        throw EvalError("non-finite result (division by zero)");
      if (n.kind == Kind::Call)
        throw EvalError(std::string("non-finite result in ") + func_name(n.func) + "()");
      throw EvalError("non-finite result");
    }
    stack[sp++] = v;
  }
  return stack[0];
}

double Expression::eval(const std::map<std::string, double>& env) const {
  Env e;
  std::vector<double> xs;
  for (const auto& [name, value] : env) {
    if (name == "t") {
      e.t = value;
    } else if (name == "s") {
      e.s = value;
    } else if (name.size() >= 2 && name[0] == 'x') {
      const int idx = std::atoi(name.c_str() + 1);
      if (idx >= 1) {
        if (xs.size() < static_cast<std::size_t>(idx))
          xs.resize(static_cast<std::size_t>(idx), std::nan(""));
        xs[static_cast<std::size_t>(idx - 1)] = value;
      }
    }
  }
  for (const Node& n : nodes_)
    if (n.kind == Kind::VarX &&
        (static_cast<std::size_t>(n.index) > xs.size() || std::isnan(xs[n.index - 1])))
      throw EvalError("unbound variable 'x" + std::to_string(n.index) + "'");
  e.x = xs;
  return eval(e);
}

std::string Expression::to_string() const {
  if (nodes_.empty()) return {};
  std::vector<std::string> parts;
  for (const Node& n : nodes_) {
    switch (n.kind) {
      case Kind::Number: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        parts.emplace_back(buf);
        break;
      }
      case Kind::VarT: parts.emplace_back("t"); break;
      case Kind::VarS: parts.emplace_back("s"); break;
      case Kind::VarX: parts.emplace_back("x" + std::to_string(n.index)); break;
      case Kind::Neg: parts.back() = "(-" + parts.back() + ")"; break;
      case Kind::Call: parts.back() = std::string(func_name(n.func)) + "(" + parts.back() + ")"; break;
      case Kind::Binary: {
        std::string b = std::move(parts.back());
        parts.pop_back();
        parts.back() = "(" + parts.back() + " " + binop_char(n.op) + " " + b + ")";
        break;
      }
    }
  }
  return parts.back();
}

VariableUsage Expression::variables() const {
  VariableUsage u;
  for (const Node& n : nodes_) {
    if (n.kind == Kind::VarT) u.uses_t = true;
    if (n.kind == Kind::VarS) u.uses_s = true;
    if (n.kind == Kind::VarX) u.max_x = std::max(u.max_x, n.index);
  }
  return u;
}

int Expression::depth() const {
  std::vector<int> d(nodes_.size(), 1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.lhs >= 0) d[i] = std::max(d[i], d[static_cast<std::size_t>(n.lhs)] + 1);
    if (n.rhs >= 0) d[i] = std::max(d[i], d[static_cast<std::size_t>(n.rhs)] + 1);
  }
  return nodes_.empty() ? 0 : d.back();
}

void require_variables(const Expression& e, bool allow_t, bool allow_s, int max_x,
                       const std::string& what) {
  const VariableUsage u = e.variables();
  if (u.uses_t && !allow_t) throw DomainError(what + ": variable 't' is not allowed here");
  if (u.uses_s && !allow_s) throw DomainError(what + ": variable 's' is not allowed here");
  if (u.max_x > max_x)
    throw DomainError(what + ": references x" + std::to_string(u.max_x) + " but the state has " +
                      std::to_string(max_x) + " component(s)");
}

}  // namespace impulsive
