#pragma once

#include "subell/core.hpp"

#include <memory>
#include <string>

namespace subell {

/// Arithmetic expression in the variables x (and y in 2D).
///
/// Grammar: numeric literals, + - * / ^ (right associative), unary minus,
/// parentheses, and the functions min, max, abs, sin, cos, exp, ln.
class Expression {
public:
  static Expression parse(const std::string& text);

  Real operator()(Real x, Real y = 0.0) const;
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

} // namespace subell
