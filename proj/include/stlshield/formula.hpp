#pragma once

#include "stlshield/predicate.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace stlshield::stl {

enum class Op { True, Atom, Not, And, Or, Until };

/// Immutable STL syntax tree over the core connectives. Eventually and Always
/// are sugar and never appear as nodes:
///   F[a,b] f  ==  TRUE U[a,b] f
///   G[a,b] f  ==  !(TRUE U[a,b] !f)
class Formula {
 public:
  Op op() const { return node_->op; }

  /// Operand of Not, left operand of And/Or/Until.
  const Formula& lhs() const { return *node_->lhs; }
  const Formula& rhs() const { return *node_->rhs; }

  /// Until interval bounds, seconds relative to the evaluation time.
  double lower() const { return node_->lower; }
  double upper() const { return node_->upper; }

  const Predicate& predicate() const { return *node_->predicate; }

  /// Common dimension of all atoms, or 0 for atom-free formulas.
  Eigen::Index dim() const { return node_->dim; }

  /// Identity of the shared node; used to memoize evaluation.
  const void* id() const { return node_.get(); }

  std::string to_string() const;

  friend bool operator==(const Formula& x, const Formula& y);

  friend struct FormulaBuilder;

 private:
  struct Node {
    Op op = Op::True;
    std::shared_ptr<const Formula> lhs;
    std::shared_ptr<const Formula> rhs;
    double lower = 0.0;
    double upper = 0.0;
    std::shared_ptr<const Predicate> predicate;
    Eigen::Index dim = 0;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

Formula make_true();
Formula atom(std::shared_ptr<const Predicate> p);
Formula negation(Formula f);
Formula conjunction(Formula x, Formula y);
Formula disjunction(Formula x, Formula y);
/// Throws InputError unless 0 <= a <= b < infinity.
Formula until(double a, double b, Formula x, Formula y);
Formula eventually(double a, double b, Formula f);
Formula always(double a, double b, Formula f);

/// Grammar (whitespace-insensitive):
///   formula := or
///   or      := and ('|' and)*
///   and     := until ('&' until)*
///   until   := unary ('U[' num ',' num ']' unary)?
///   unary   := '!' unary | 'F[' num ',' num ']' unary
///            | 'G[' num ',' num ']' unary | atom
///   atom    := 'TRUE' | IDENT | '(' formula ')'
/// Throws ParseError (with the offending offset) on bad syntax, undeclared
/// identifiers and inverted intervals.
Formula parse(std::string_view text, const PredicateTable& predicates);

}  // namespace stlshield::stl
