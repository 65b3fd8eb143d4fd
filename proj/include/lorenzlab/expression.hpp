#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lorenzlab {

class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& what, std::size_t column)
      : std::runtime_error(what + " at column " + std::to_string(column)), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

// Compiled scalar expression in x and y.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | 'x' | 'y' | 'pi' | fn '(' expr ')' | '(' expr ')'
//   fn      := 'sin' | 'cos' | 'exp'
class Expression {
 public:
  static Expression parse(const std::string& text);

  // Throws std::domain_error when the value is not finite.
  double eval(double x, double y) const;

  const std::string& text() const { return text_; }

 private:
  enum class Op { constant, var_x, var_y, add, sub, mul, div, pow, neg, sin, cos, exp };
  struct Node {
    Op op;
    double value = 0.0;
    int lhs = -1;
    int rhs = -1;
  };
  friend class ExpressionParser;

  double eval_node(int index, double x, double y) const;

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace lorenzlab
