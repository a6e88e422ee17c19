#include "hillnet/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace hillnet {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view s, const std::vector<std::string>& vars, Expression& out)
      : s_(s), vars_(vars), out_(out) {}

  void run() {
    sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
  }

 private:
  void fail(const std::string& msg) const {
    throw std::invalid_argument("expression '" + std::string(s_) + "' at " + std::to_string(pos_) +
                                ": " + msg);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void emit(Expression::Op op, double v = 0.0, int var = -1) {
    out_.code_.push_back({op, v, var});
    if (op == Expression::Op::push_const || op == Expression::Op::push_var) ++depth_;
    else if (op != Expression::Op::neg) --depth_;
    out_.stack_depth_ = std::max(out_.stack_depth_, depth_);
  }

  void sum() {
    product();
    for (;;) {
      if (accept('+')) {
        product();
        emit(Expression::Op::add);
      } else if (accept('-')) {
        product();
        emit(Expression::Op::sub);
      } else {
        return;
      }
    }
  }
  void product() {
    unary();
    while (accept('*')) {
      unary();
      emit(Expression::Op::mul);
    }
  }
  void unary() {
    if (accept('-')) {
      unary();
      emit(Expression::Op::neg);
    } else if (accept('+')) {
      unary();
    } else {
      atom();
    }
  }
  void atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      sum();
      if (!accept(')')) fail("missing ')'");
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ = static_cast<std::size_t>(ptr - s_.data());
      emit(Expression::Op::push_const, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string_view name = s_.substr(start, pos_ - start);
      auto it = std::find(vars_.begin(), vars_.end(), name);
      if (it == vars_.end()) fail("unknown variable '" + std::string(name) + "'");
      emit(Expression::Op::push_var, 0.0, static_cast<int>(it - vars_.begin()));
      return;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  Expression& out_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

Expression Expression::parse(std::string_view text, const std::vector<std::string>& variables) {
  Expression e;
  e.text_ = std::string(text);
  ExpressionParser(text, variables, e).run();
  return e;
}

Expression Expression::constant(double c) {
  Expression e;
  e.code_.push_back({Op::push_const, c, -1});
  e.stack_depth_ = 1;
  e.text_ = std::to_string(c);
  return e;
}

double Expression::eval(std::span<const double> values) const {
  double stack[64] = {};
  std::vector<double> heap;
  double* st = stack;
  if (stack_depth_ > 64) {
    heap.resize(stack_depth_);
    st = heap.data();
  }
  int top = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::push_const: st[top++] = in.value; break;
      case Op::push_var:
        if (in.var >= static_cast<int>(values.size()))
          throw std::invalid_argument("expression variable index out of range");
        st[top++] = values[in.var];
        break;
      case Op::add: --top; st[top - 1] += st[top]; break;
      case Op::sub: --top; st[top - 1] -= st[top]; break;
      case Op::mul: --top; st[top - 1] *= st[top]; break;
      case Op::neg: st[top - 1] = -st[top - 1]; break;
    }
  }
  return st[0];
}

}  // namespace hillnet
