#pragma once

// A small arithmetic-expression evaluator for user-defined drift, diffusion
// and perturbation fields.
//
// Grammar (usual precedence, ^ is right associative and binds tighter than
// unary minus, so -x^2 == -(x^2)):
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' expr ')' | '(' expr ')'
//
// Names: the bound variables, constants `pi` and `e`; functions tanh, exp,
// sqrt, abs, sin, cos, log.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace levyfdt {

class Expression {
 public:
  /// Parse `source` with the given variable names (e.g. {"x"} or {"x1","x2"}).
  /// Throws ConfigError with the offending position on a syntax error.
  static Expression parse(std::string_view source, std::vector<std::string> variables);

  /// Evaluate with `values[i]` bound to the i-th variable. Thread-safe.
  double operator()(std::span<const double> values) const;
  double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

  const std::string& source() const { return source_; }

  struct Node;

 private:
  Expression(std::string source, std::shared_ptr<const Node> root, std::size_t arity)
      : source_(std::move(source)), root_(std::move(root)), arity_(arity) {}

  std::string source_;
  std::shared_ptr<const Node> root_;
  std::size_t arity_;
};

}  // namespace levyfdt
