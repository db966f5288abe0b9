#pragma once

// Scalar expressions in one variable x, used for coefficients given in
// config files.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' | 'pi' | name '(' expr ')' | '(' expr ')'
//   name    := exp | log | sin | cos | sqrt
//
// '^' is right associative and binds tighter than unary minus, so -x^2 is
// -(x^2).

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <utility>

#include "degenbeam/errors.hpp"

namespace degenbeam {

class Expression {
 public:
  static Expression parse(const std::string& text) {
    Parser parser{text, 0};
    NodePtr root = parser.expr();
    parser.skip_space();
    if (parser.pos != text.size()) {
      throw ConfigError("unexpected '" + std::string(1, text[parser.pos]) +
                        "' at offset " + std::to_string(parser.pos) +
                        " in expression \"" + text + "\"");
    }
    return Expression(std::move(root), text);
  }

  double operator()(double x) const { return eval(*root_, x); }
  const std::string& text() const { return text_; }

 private:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sin, Cos, Sqrt };

  struct Node {
    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  static NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    return std::make_shared<const Node>(Node{op, 0.0, std::move(lhs), std::move(rhs)});
  }

  struct Parser {
    const std::string& s;
    std::size_t pos;

    void skip_space() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_space();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    [[noreturn]] void fail(const std::string& what) {
      throw ConfigError(what + " at offset " + std::to_string(pos) + " in expression \"" + s + "\"");
    }

    NodePtr expr() {
      NodePtr node = term();
      while (true) {
        if (accept('+')) {
          node = make(Op::Add, node, term());
        } else if (accept('-')) {
          node = make(Op::Sub, node, term());
        } else {
          return node;
        }
      }
    }
    NodePtr term() {
      NodePtr node = unary();
      while (true) {
        if (accept('*')) {
          node = make(Op::Mul, node, unary());
        } else if (accept('/')) {
          node = make(Op::Div, node, unary());
        } else {
          return node;
        }
      }
    }
    NodePtr unary() {
      if (accept('-')) return make(Op::Neg, unary());
      if (accept('+')) return unary();
      return power();
    }
    NodePtr power() {
      NodePtr base = primary();
      if (accept('^')) return make(Op::Pow, base, unary());
      return base;
    }
    NodePtr primary() {
      skip_space();
      if (pos >= s.size()) fail("unexpected end");
      char c = s[pos];
      if (accept('(')) {
        NodePtr inner = expr();
        if (!accept(')')) fail("expected ')'");
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          fail("malformed number");
        }
        pos += used;
        auto node = std::make_shared<Node>(Node{Op::Const, v, nullptr, nullptr});
        return node;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        std::string name = s.substr(start, pos - start);
        if (name == "x") return make(Op::Var);
        if (name == "pi") {
          return std::make_shared<Node>(Node{Op::Const, std::numbers::pi, nullptr, nullptr});
        }
        Op op;
        if (name == "exp") {
          op = Op::Exp;
        } else if (name == "log") {
          op = Op::Log;
        } else if (name == "sin") {
          op = Op::Sin;
        } else if (name == "cos") {
          op = Op::Cos;
        } else if (name == "sqrt") {
          op = Op::Sqrt;
        } else {
          pos = start;
          fail("unknown name '" + name + "'");
        }
        if (!accept('(')) fail("expected '(' after " + name);
        NodePtr arg = expr();
        if (!accept(')')) fail("expected ')'");
        return make(op, arg);
      }
      fail("unexpected character");
    }
  };

  static double eval(const Node& n, double x) {
    switch (n.op) {
      case Op::Const: return n.value;
      case Op::Var: return x;
      case Op::Add: return eval(*n.lhs, x) + eval(*n.rhs, x);
      case Op::Sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
      case Op::Mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
      case Op::Div: return eval(*n.lhs, x) / eval(*n.rhs, x);
      case Op::Pow: return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
      case Op::Neg: return -eval(*n.lhs, x);
      case Op::Exp: return std::exp(eval(*n.lhs, x));
      case Op::Log: return std::log(eval(*n.lhs, x));
      case Op::Sin: return std::sin(eval(*n.lhs, x));
      case Op::Cos: return std::cos(eval(*n.lhs, x));
      case Op::Sqrt: return std::sqrt(eval(*n.lhs, x));
    }
    return 0.0;
  }

  Expression(NodePtr root, std::string text) : root_(std::move(root)), text_(std::move(text)) {}

  NodePtr root_;
  std::string text_;
};

}  // namespace degenbeam
