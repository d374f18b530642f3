#include "subell/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace subell {

struct Expression::Node {
  enum class Op {
    Literal,
    VarX,
    VarY,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Min,
    Max,
    Abs,
    Sin,
    Cos,
    Exp,
    Ln
  };
  Op op;
  Real value = 0.0;
  std::shared_ptr<const Node> a, b;

  Real eval(Real x, Real y) const {
    switch (op) {
    case Op::Literal: return value;
    case Op::VarX: return x;
    case Op::VarY: return y;
    case Op::Add: return a->eval(x, y) + b->eval(x, y);
    case Op::Sub: return a->eval(x, y) - b->eval(x, y);
    case Op::Mul: return a->eval(x, y) * b->eval(x, y);
    case Op::Div: return a->eval(x, y) / b->eval(x, y);
    case Op::Pow: return std::pow(a->eval(x, y), b->eval(x, y));
    case Op::Neg: return -a->eval(x, y);
    case Op::Min: return std::min(a->eval(x, y), b->eval(x, y));
    case Op::Max: return std::max(a->eval(x, y), b->eval(x, y));
    case Op::Abs: return std::abs(a->eval(x, y));
    case Op::Sin: return std::sin(a->eval(x, y));
    case Op::Cos: return std::cos(a->eval(x, y));
    case Op::Exp: return std::exp(a->eval(x, y));
    case Op::Ln: return std::log(a->eval(x, y));
    }
    return kNaN;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

class Parser {
public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr run() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      fail("unexpected trailing input");
    return e;
  }

private:
  const std::string& text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression parse error at offset " +
                                std::to_string(pos_) + ": " + what + " in '" +
                                text_ + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  static NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr parse_sum() {
    NodePtr e = parse_product();
    for (;;) {
      if (consume('+'))
        e = make(Node::Op::Add, e, parse_product());
      else if (consume('-'))
        e = make(Node::Op::Sub, e, parse_product());
      else
        return e;
    }
  }

  NodePtr parse_product() {
    NodePtr e = parse_unary();
    for (;;) {
      if (consume('*'))
        e = make(Node::Op::Mul, e, parse_unary());
      else if (consume('/'))
        e = make(Node::Op::Div, e, parse_unary());
      else
        return e;
    }
  }

  NodePtr parse_unary() {
    if (consume('-'))
      return make(Node::Op::Neg, parse_unary());
    if (consume('+'))
      return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (consume('^')) {
      // right associative; exponent may carry its own unary sign
      NodePtr exponent = parse_unary();
      return make(Node::Op::Pow, base, exponent);
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size())
      fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      if (!consume(')'))
        fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)))
      return parse_name();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    Real v = std::strtod(begin, &end);
    if (end == begin)
      fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Literal;
    n->value = v;
    return n;
  }

  NodePtr parse_name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalnum(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    if (name == "x") return make(Node::Op::VarX);
    if (name == "y") return make(Node::Op::VarY);

    struct Fn { const char* name; Node::Op op; int arity; };
    static const std::vector<Fn> fns = {
        {"min", Node::Op::Min, 2}, {"max", Node::Op::Max, 2},
        {"abs", Node::Op::Abs, 1}, {"sin", Node::Op::Sin, 1},
        {"cos", Node::Op::Cos, 1}, {"exp", Node::Op::Exp, 1},
        {"ln", Node::Op::Ln, 1}};
    for (const Fn& fn : fns) {
      if (name != fn.name)
        continue;
      if (!consume('('))
        fail("expected '(' after " + name);
      NodePtr a = parse_sum();
      NodePtr b;
      if (fn.arity == 2) {
        if (!consume(','))
          fail("expected ',' in " + name);
        b = parse_sum();
      }
      if (!consume(')'))
        fail("expected ')' closing " + name);
      return make(fn.op, a, b);
    }
    fail("unknown identifier '" + name + "'");
  }
};

} // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).run();
  e.text_ = text;
  return e;
}

Real Expression::operator()(Real x, Real y) const {
  return root_->eval(x, y);
}

} // namespace subell
