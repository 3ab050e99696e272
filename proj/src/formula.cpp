#include "stlshield/formula.hpp"

#include "number_format.hpp"
#include "stlshield/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace stlshield::stl {

namespace {

Eigen::Index merge_dim(Eigen::Index x, Eigen::Index y) {
  if (x != 0 && y != 0 && x != y)
    throw InputError("formula mixes predicates of dimension " + std::to_string(x) + " and " +
                     std::to_string(y));
  return x != 0 ? x : y;
}

}  // namespace

struct FormulaBuilder {
  using Node = Formula::Node;
  static Formula make(Formula::Node n) {
    return Formula(std::make_shared<const Formula::Node>(std::move(n)));
  }

  static Formula make(Op op, Formula x, Formula y, double a = 0.0, double b = 0.0) {
    Formula::Node n;
    n.op = op;
    n.dim = merge_dim(x.dim(), y.dim());
    n.lower = a;
    n.upper = b;
    n.lhs = std::make_shared<const Formula>(std::move(x));
    n.rhs = std::make_shared<const Formula>(std::move(y));
    return make(std::move(n));
  }
};

Formula make_true() {
  static const Formula top = FormulaBuilder::make(FormulaBuilder::Node{});
  return top;
}

Formula atom(std::shared_ptr<const Predicate> p) {
  if (!p) throw InputError("atom needs a predicate");
  FormulaBuilder::Node n;
  n.op = Op::Atom;
  n.dim = p->dim();
  n.predicate = std::move(p);
  return FormulaBuilder::make(std::move(n));
}

Formula negation(Formula f) {
  FormulaBuilder::Node n;
  n.op = Op::Not;
  n.dim = f.dim();
  n.lhs = std::make_shared<const Formula>(std::move(f));
  return FormulaBuilder::make(std::move(n));
}

Formula conjunction(Formula x, Formula y) {
  return FormulaBuilder::make(Op::And, std::move(x), std::move(y));
}

Formula disjunction(Formula x, Formula y) {
  return FormulaBuilder::make(Op::Or, std::move(x), std::move(y));
}

Formula until(double a, double b, Formula x, Formula y) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw InputError("until bounds must be finite");
  if (a < 0.0) throw InputError("until lower bound must be non-negative");
  if (a > b) throw InputError("until interval has lower bound above upper bound");
  return FormulaBuilder::make(Op::Until, std::move(x), std::move(y), a, b);
}

Formula eventually(double a, double b, Formula f) { return until(a, b, make_true(), std::move(f)); }

Formula always(double a, double b, Formula f) {
  return negation(eventually(a, b, negation(std::move(f))));
}

std::string Formula::to_string() const {
  using detail::format_number;
  switch (op()) {
    case Op::True: return "TRUE";
    case Op::Atom: return predicate().id();
    case Op::Not: return "!" + lhs().to_string();
    case Op::And: return "(" + lhs().to_string() + " & " + rhs().to_string() + ")";
    case Op::Or: return "(" + lhs().to_string() + " | " + rhs().to_string() + ")";
    case Op::Until:
      return "(" + lhs().to_string() + " U[" + format_number(lower()) + "," +
             format_number(upper()) + "] " + rhs().to_string() + ")";
  }
  return {};
}

bool operator==(const Formula& x, const Formula& y) {
  if (x.node_ == y.node_) return true;
  if (x.op() != y.op()) return false;
  switch (x.op()) {
    case Op::True: return true;
    case Op::Atom: return x.predicate().id() == y.predicate().id();
    case Op::Not: return x.lhs() == y.lhs();
    case Op::And:
    case Op::Or: return x.lhs() == y.lhs() && x.rhs() == y.rhs();
    case Op::Until:
      return x.lower() == y.lower() && x.upper() == y.upper() && x.lhs() == y.lhs() &&
             x.rhs() == y.rhs();
  }
  return false;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const PredicateTable& predicates)
      : text_(text), predicates_(predicates) {}

  Formula parse() {
    Formula f = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  /// Peeks an identifier at the cursor without consuming it.
  std::string_view peek_ident() {
    skip_ws();
    std::size_t end = pos_;
    if (end < text_.size() && ident_start(text_[end])) {
      while (end < text_.size() && ident_char(text_[end])) ++end;
    }
    return text_.substr(pos_, end - pos_);
  }

  /// True when the cursor holds the one-letter operator `name` followed by '['.
  bool at_temporal(char name) {
    const auto id = peek_ident();
    if (id.size() != 1 || id[0] != name) return false;
    std::size_t look = pos_ + 1;
    while (look < text_.size() && std::isspace(static_cast<unsigned char>(text_[look]))) ++look;
    return look < text_.size() && text_[look] == '[';
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (start == pos_) fail("expected a number");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc{} || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return v;
  }

  std::pair<double, double> interval() {
    expect('[');
    const std::size_t start = pos_;
    const double a = number();
    expect(',');
    const double b = number();
    expect(']');
    if (a > b) throw ParseError("interval lower bound exceeds upper bound", start);
    return {a, b};
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (accept('|')) f = disjunction(std::move(f), parse_and());
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (accept('&')) f = conjunction(std::move(f), parse_until());
    return f;
  }

  Formula parse_until() {
    Formula lhs = parse_unary();
    if (at_temporal('U')) {
      ++pos_;
      const auto [a, b] = interval();
      return checked_until(a, b, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  Formula parse_unary() {
    if (accept('!')) return negation(parse_unary());
    if (at_temporal('F')) {
      ++pos_;
      const auto [a, b] = interval();
      return checked_until(a, b, make_true(), parse_unary());
    }
    if (at_temporal('G')) {
      ++pos_;
      const auto [a, b] = interval();
      return negation(checked_until(a, b, make_true(), negation(parse_unary())));
    }
    return parse_atom();
  }

  Formula checked_until(double a, double b, Formula x, Formula y) {
    try {
      return until(a, b, std::move(x), std::move(y));
    } catch (const InputError& e) {
      fail(e.what());
    }
  }

  Formula parse_atom() {
    if (accept('(')) {
      Formula f = parse_or();
      expect(')');
      return f;
    }
    const auto id = peek_ident();
    if (id.empty()) {
      if (pos_ >= text_.size()) fail("unexpected end of formula");
      fail("expected a predicate, TRUE or '('");
    }
    if (id == "TRUE") {
      pos_ += id.size();
      return make_true();
    }
    const auto it = predicates_.find(id);
    if (it == predicates_.end()) fail("undeclared predicate '" + std::string(id) + "'");
    pos_ += id.size();
    return atom(it->second);
  }

  std::string_view text_;
  const PredicateTable& predicates_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse(std::string_view text, const PredicateTable& predicates) {
  try {
    return Parser(text, predicates).parse();
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    // Dimension clashes surface from the builders without a position.
    throw ParseError(e.what(), text.size());
  }
}

}  // namespace stlshield::stl
