/// @file expr.hpp
/// @brief Scalar expressions over x, y, z, t used to define analytic fields in
/// scenario files.
///
/// Grammar (whitespace ignored):
///
///     expr    := term (("+" | "-") term)*
///     term    := unary (("*" | "/") unary)*
///     unary   := "-" unary | power
///     power   := primary ("^" unary)?
///     primary := number | ident | func "(" expr ")" | "(" expr ")"
///     ident   := x | y | z | t
///     func    := sin | cos | exp | tanh
///
/// so that `^` binds tighter than unary minus (`-x^2` is `-(x^2)`), binary
/// operators associate to the left and `^` to the right.
#pragma once

#include "geotr/core.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>

namespace geotr {

class FieldExpr {
 public:
  enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Tanh };

  struct Node {
    Kind kind;
    double value = 0.0;  // Number
    int var = 0;         // Var: 0=x 1=y 2=z 3=t
    std::shared_ptr<const Node> lhs, rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  FieldExpr() = default;
  explicit FieldExpr(NodePtr root) : root_(std::move(root)) {}

  static FieldExpr number(double v) {
    return FieldExpr(std::make_shared<Node>(Node{Kind::Number, v, 0, {}, {}}));
  }

  const NodePtr& root() const { return root_; }
  bool empty() const { return !root_; }

  /// Evaluates at (x, y, z, t); missing coordinates are read as zero.
  double operator()(const Vec& x, double t = 0.0) const {
    double env[4] = {0.0, 0.0, 0.0, t};
    for (int a = 0; a < std::min<int>(3, static_cast<int>(x.size())); ++a) env[a] = x[a];
    return eval(*root_, env);
  }

  double eval(const double* env) const { return eval(*root_, env); }

  /// True if the variable t occurs anywhere in the tree.
  bool depends_on_time() const { return root_ && uses_var(*root_, 3); }

  /// Highest spatial variable index used plus one (0 if none).
  int spatial_arity() const {
    if (!root_) return 0;
    for (int v = 2; v >= 0; --v)
      if (uses_var(*root_, v)) return v + 1;
    return 0;
  }

  /// Fully parenthesised rendering that parses back to the same tree.
  std::string to_string() const { return root_ ? print(*root_) : std::string(); }

  friend bool structurally_equal(const FieldExpr& a, const FieldExpr& b) {
    if (!a.root_ || !b.root_) return a.root_ == b.root_;
    return same(*a.root_, *b.root_);
  }

 private:
  static double eval(const Node& n, const double* env) {
    switch (n.kind) {
      case Kind::Number: return n.value;
      case Kind::Var: return env[n.var];
      case Kind::Neg: return -eval(*n.lhs, env);
      case Kind::Add: return eval(*n.lhs, env) + eval(*n.rhs, env);
      case Kind::Sub: return eval(*n.lhs, env) - eval(*n.rhs, env);
      case Kind::Mul: return eval(*n.lhs, env) * eval(*n.rhs, env);
      case Kind::Div: return eval(*n.lhs, env) / eval(*n.rhs, env);
      case Kind::Pow: {
        double base = eval(*n.lhs, env);
        // Integer exponents go through repeated multiplication so negative
        // bases behave as written (x^3 with x<0).
        if (n.rhs->kind == Kind::Number && n.rhs->value == std::floor(n.rhs->value) &&
            std::abs(n.rhs->value) <= 16) {
          int e = static_cast<int>(n.rhs->value);
          double r = 1.0;
          for (int i = 0; i < std::abs(e); ++i) r *= base;
          return e < 0 ? 1.0 / r : r;
        }
        return std::pow(base, eval(*n.rhs, env));
      }
      case Kind::Sin: return std::sin(eval(*n.lhs, env));
      case Kind::Cos: return std::cos(eval(*n.lhs, env));
      case Kind::Exp: return std::exp(eval(*n.lhs, env));
      case Kind::Tanh: return std::tanh(eval(*n.lhs, env));
    }
    return 0.0;
  }

  static bool uses_var(const Node& n, int v) {
    if (n.kind == Kind::Var) return n.var == v;
    return (n.lhs && uses_var(*n.lhs, v)) || (n.rhs && uses_var(*n.rhs, v));
  }

  static bool same(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::Number) return a.value == b.value;
    if (a.kind == Kind::Var) return a.var == b.var;
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs) ||
        static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs))
      return false;
    return (!a.lhs || same(*a.lhs, *b.lhs)) && (!a.rhs || same(*a.rhs, *b.rhs));
  }

  static std::string print(const Node& n) {
    static constexpr const char* kVars[] = {"x", "y", "z", "t"};
    switch (n.kind) {
      case Kind::Number: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        return buf;
      }
      case Kind::Var: return kVars[n.var];
      case Kind::Neg: return "-(" + print(*n.lhs) + ")";
      case Kind::Add: return "(" + print(*n.lhs) + " + " + print(*n.rhs) + ")";
      case Kind::Sub: return "(" + print(*n.lhs) + " - " + print(*n.rhs) + ")";
      case Kind::Mul: return "(" + print(*n.lhs) + " * " + print(*n.rhs) + ")";
      case Kind::Div: return "(" + print(*n.lhs) + " / " + print(*n.rhs) + ")";
      case Kind::Pow: return "((" + print(*n.lhs) + ")^(" + print(*n.rhs) + "))";
      case Kind::Sin: return "sin(" + print(*n.lhs) + ")";
      case Kind::Cos: return "cos(" + print(*n.lhs) + ")";
      case Kind::Exp: return "exp(" + print(*n.lhs) + ")";
      case Kind::Tanh: return "tanh(" + print(*n.lhs) + ")";
    }
    return {};
  }

  NodePtr root_;
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : s_(text) {}

  FieldExpr parse() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("empty expression", pos_);
    auto root = expr();
    skip_ws();
    if (pos_ < s_.size())
      throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return FieldExpr(std::move(root));
  }

 private:
  using Kind = FieldExpr::Kind;
  using Node = FieldExpr::Node;
  using NodePtr = FieldExpr::NodePtr;

  static NodePtr make(Kind k, NodePtr l = {}, NodePtr r = {}) {
    return std::make_shared<Node>(Node{k, 0.0, 0, std::move(l), std::move(r)});
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Kind::Add, lhs, term());
      else if (accept('-')) lhs = make(Kind::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Kind::Mul, lhs, unary());
      else if (accept('/')) lhs = make(Kind::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::Neg, unary());
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return ident();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number() {
    std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) digits();
      else pos_ = save;
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok == ".") throw ParseError("malformed number", start);
    auto n = std::make_shared<Node>(Node{Kind::Number, std::stod(tok), 0, {}, {}});
    return n;
  }

  NodePtr ident() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string_view id = s_.substr(start, pos_ - start);
    if (id.size() == 1 && (id[0] == 'x' || id[0] == 'y' || id[0] == 'z' || id[0] == 't')) {
      int var = id[0] == 't' ? 3 : id[0] - 'x';
      return std::make_shared<Node>(Node{Kind::Var, 0.0, var, {}, {}});
    }
    Kind k;
    if (id == "sin") k = Kind::Sin;
    else if (id == "cos") k = Kind::Cos;
    else if (id == "exp") k = Kind::Exp;
    else if (id == "tanh") k = Kind::Tanh;
    else throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    if (!accept('(')) throw ParseError("expected '(' after " + std::string(id), pos_);
    auto arg = expr();
    if (!accept(')')) throw ParseError("expected ')'", pos_);
    return make(k, arg);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline FieldExpr parse_field_expr(std::string_view text) {
  return detail::ExprParser(text).parse();
}

}  // namespace geotr
