#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cflow {

/// Scalar expression over a fixed list of named variables.
///
/// Grammar: numbers, variables, `+ - * / ^`, unary minus, parentheses and the
/// functions exp, ln (alias log), sin, cos, sqrt. `pi` and `e` are constants
/// unless shadowed by a variable of the same name. `^` is right associative
/// and binds tighter than unary minus, so `-x^2` is `-(x^2)`.
///
/// Expressions are immutable; copies share the tree and are safe to evaluate
/// from several threads.
class Expression {
 public:
  struct Node;

  Expression();  // the constant 0
  static Expression parse(std::string_view source, std::vector<std::string> variables);
  static Expression constant(double value, std::vector<std::string> variables = {});

  double evaluate(std::span<const double> values) const;

  /// Symbolic partial derivative with respect to variable `index`.
  Expression derivative(std::size_t index) const;
  bool depends_on(std::size_t index) const;
  bool is_constant() const;

  const std::vector<std::string>& variables() const { return variables_; }
  std::string to_string() const;

 private:
  Expression(std::shared_ptr<const Node> root, std::vector<std::string> variables);

  std::shared_ptr<const Node> root_;
  std::vector<std::string> variables_;
};

/// Variable list `t, q1..qd` used by position-dependent fields.
std::vector<std::string> position_variables(int dimension);
/// Variable list `t, q1..qd, v1..vd` used by forces.
std::vector<std::string> phase_variables(int dimension);

}  // namespace cflow
