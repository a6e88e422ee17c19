#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hillnet {

/// Polynomial arithmetic over named variables: literals, identifiers,
/// + - * and parentheses, with unary minus. Compiled to a postfix program.
class Expression {
 public:
  /// Throws std::invalid_argument on syntax errors or unknown identifiers.
  static Expression parse(std::string_view text, const std::vector<std::string>& variables);
  static Expression constant(double c);

  double eval(std::span<const double> values) const;
  const std::string& text() const { return text_; }

 private:
  enum class Op { push_const, push_var, add, sub, mul, neg };
  struct Instr {
    Op op;
    double value;
    int var;
  };
  std::vector<Instr> code_;
  std::string text_;
  int stack_depth_ = 0;

  friend class ExpressionParser;
};

}  // namespace hillnet
