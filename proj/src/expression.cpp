#include "lorenzlab/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace lorenzlab {

class ExpressionParser {
 public:
  explicit ExpressionParser(Expression& out) : out_(out), src_(out.text_) {}

  int parse_all() {
    int root = parse_expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return root;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError(msg, pos_ + 1); }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int emit(Op op, int lhs = -1, int rhs = -1, double value = 0.0) {
    out_.nodes_.push_back({op, value, lhs, rhs});
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = emit(Op::add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = emit(Op::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = emit(Op::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = emit(Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) return emit(Op::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    int base = parse_primary();
    if (accept('^')) return emit(Op::pow, base, parse_unary());
    return base;
  }

  int parse_primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return emit(Op::constant, -1, -1, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      std::string word = src_.substr(start, pos_ - start);
      if (word == "x") return emit(Op::var_x);
      if (word == "y") return emit(Op::var_y);
      if (word == "pi") return emit(Op::constant, -1, -1, std::numbers::pi);
      Op fn;
      if (word == "sin") {
        fn = Op::sin;
      } else if (word == "cos") {
        fn = Op::cos;
      } else if (word == "exp") {
        fn = Op::exp;
      } else {
        pos_ = start;
        fail("unknown identifier '" + word + "'");
      }
      if (!accept('(')) fail("expected '(' after " + word);
      int arg = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return emit(fn, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expression& out_;
  const std::string& src_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  ExpressionParser parser(e);
  e.root_ = parser.parse_all();
  return e;
}

double Expression::eval(double x, double y) const {
  double v = eval_node(root_, x, y);
  if (!std::isfinite(v)) {
    throw std::domain_error("expression '" + text_ + "' is not finite at (" + std::to_string(x) +
                            ", " + std::to_string(y) + ")");
  }
  return v;
}

double Expression::eval_node(int index, double x, double y) const {
  const Node& n = nodes_[static_cast<std::size_t>(index)];
  switch (n.op) {
    case Op::constant:
      return n.value;
    case Op::var_x:
      return x;
    case Op::var_y:
      return y;
    case Op::add:
      return eval_node(n.lhs, x, y) + eval_node(n.rhs, x, y);
    case Op::sub:
      return eval_node(n.lhs, x, y) - eval_node(n.rhs, x, y);
    case Op::mul:
      return eval_node(n.lhs, x, y) * eval_node(n.rhs, x, y);
    case Op::div:
      return eval_node(n.lhs, x, y) / eval_node(n.rhs, x, y);
    case Op::pow:
      return std::pow(eval_node(n.lhs, x, y), eval_node(n.rhs, x, y));
    case Op::neg:
      return -eval_node(n.lhs, x, y);
    case Op::sin:
      return std::sin(eval_node(n.lhs, x, y));
    case Op::cos:
      return std::cos(eval_node(n.lhs, x, y));
    case Op::exp:
      return std::exp(eval_node(n.lhs, x, y));
  }
  return 0.0;
}

}  // namespace lorenzlab
