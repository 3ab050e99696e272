#include "oracles.hpp"

#include "stlshield/certificate.hpp"
#include "stlshield/errors.hpp"
#include "stlshield/formula.hpp"
#include "stlshield/monitor.hpp"
#include "stlshield/predicate.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>

using namespace stlshield;
using namespace stlshield::stl;

namespace {

std::shared_ptr<const Predicate> ball1(const std::string& id, double c, double r) {
  return std::make_shared<const Predicate>(Predicate::ball(id, Vector{{c}}, r));
}

PredicateTable table() {
  PredicateTable t;
  t["inside"] = ball1("inside", 0.0, 2.0);
  t["p"] = ball1("p", 0.0, 1.0);
  t["q"] = ball1("q", 1.0, 1.0);
  return t;
}

Signal constant1(double c, std::size_t n = 61, double dt = 0.1) {
  return Signal(0.0, dt, std::vector<Vector>(n, Vector{{c}}));
}

}  // namespace

TEST_CASE("predicate margins") {
  CHECK(predicate_margin(Predicate::ball("b", Vector{{0.0}}, 2.0), Vector{{1.5}}) == 0.5);
  CHECK(predicate_margin(Predicate::box_inf("b", Vector{{0.0, 0.0}}, 0.2), Vector{{0.2, 0.0}}) == 0.0);
  CHECK(predicate_margin(Predicate::halfspace("h", Vector{{1.0, 0.0}}, 1.0), Vector{{3.0, 9.0}}) == -2.0);
  // Normal and offset are scaled together, so the zero set is unchanged.
  const auto h = Predicate::halfspace("h", Vector{{3.0, 4.0}}, 5.0);
  CHECK(h.margin(Vector{{0.6, 0.8}}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(h.margin(Vector{{0.0, 0.0}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(predicate_margin(Predicate::ball("b", Vector{{0.0}}, 2.0), Vector{{1.0, 1.0}}), InputError);
  CHECK_THROWS_AS(Predicate::custom("c", 1, [](const Vector& x) { return x(0); }, 0.0), InputError);
}

TEST_CASE("built-in predicates are 1-Lipschitz and the audit notices a lie") {
  const Vector lo = Vector::Constant(2, -3.0), hi = Vector::Constant(2, 3.0);
  CHECK(audit_lipschitz(Predicate::ball("b", Vector{{0.5, -1.0}}, 1.0), lo, hi, 2000, 1) <= 1.0 + 1e-12);
  CHECK(audit_lipschitz(Predicate::box_inf("b", Vector{{0.5, -1.0}}, 1.0), lo, hi, 2000, 2) <= 1.0 + 1e-12);
  CHECK(audit_lipschitz(Predicate::halfspace("h", Vector{{2.0, -1.0}}, 0.3), lo, hi, 2000, 3) <= 1.0 + 1e-12);
  const auto liar = Predicate::custom("c", 2, [](const Vector& x) { return 5.0 * x(0); }, 1.0);
  CHECK(audit_lipschitz(liar, lo, hi, 500, 4) > 1.0);
}

TEST_CASE("predicate json") {
  const auto t = parse_predicates_json(R"([
    {"id": "h", "kind": "halfspace", "normal": [0, 2], "offset": 1},
    {"id": "b", "kind": "ball", "center": [1, 1], "radius": 0.5},
    {"id": "x", "kind": "box_inf", "center": [0, 0], "radius": 0.2}])");
  REQUIRE(t.size() == 3);
  CHECK(t.at("h")->margin(Vector{{0.0, 0.0}}) == doctest::Approx(0.5));
  CHECK(t.at("x")->kind() == Predicate::Kind::BoxInf);
  CHECK_THROWS_AS(parse_predicates_json(R"([{"id": "b", "kind": "ball", "center": [0], "radius": 1},
                                           {"id": "b", "kind": "ball", "center": [0], "radius": 1}])"),
                  InputError);
  CHECK_THROWS_AS(parse_predicates_json(R"([{"id": "b", "kind": "blob"}])"), InputError);
  CHECK_THROWS_AS(parse_predicates_json("not json"), InputError);
}

TEST_CASE("parser desugars and validates") {
  const auto t = table();
  const Formula g = parse("G[0,2] inside", t);
  const Formula expected = negation(until(0, 2, make_true(), negation(atom(t.at("inside")))));
  CHECK(g == expected);
  CHECK(parse("p U[1,3] q", t) == until(1, 3, atom(t.at("p")), atom(t.at("q"))));
  CHECK(parse("F[0.5,1.5] q", t) == until(0.5, 1.5, make_true(), atom(t.at("q"))));
  CHECK(parse("!p & q | TRUE", t) ==
        disjunction(conjunction(negation(atom(t.at("p"))), atom(t.at("q"))), make_true()));
  CHECK(parse(" ( p|q ) & p ", t) == conjunction(disjunction(atom(t.at("p")), atom(t.at("q"))), atom(t.at("p"))));

  CHECK_THROWS_AS(parse("p U[3,1] q", t), ParseError);
  CHECK_THROWS_AS(parse("p U[0,inf] q", t), ParseError);
  CHECK_THROWS_AS(parse("nope", t), ParseError);
  CHECK_THROWS_AS(parse("p &", t), ParseError);
  CHECK_THROWS_AS(parse("(p", t), ParseError);
  CHECK_THROWS_AS(parse("p q", t), ParseError);
  try {
    parse("p & & q", t);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("formula text round-trips through the parser") {
  Rng rng(21);
  oracle::FormulaOptions o;
  o.allow_custom = false;
  for (int i = 0; i < 100; ++i) {
    const Formula f = oracle::random_formula(rng, o);
    PredicateTable t;
    // Collect the atoms so the printed text can be parsed back.
    std::vector<const Formula*> stack{&f};
    while (!stack.empty()) {
      const Formula* g = stack.back();
      stack.pop_back();
      if (g->op() == Op::Atom) {
        const auto& p = g->predicate();
        t[p.id()] = std::make_shared<const Predicate>(p);
      }
      if (g->op() == Op::Not || g->op() == Op::And || g->op() == Op::Or || g->op() == Op::Until)
        stack.push_back(&g->lhs());
      if (g->op() == Op::And || g->op() == Op::Or || g->op() == Op::Until) stack.push_back(&g->rhs());
    }
    const Formula back = parse(f.to_string(), t);
    CHECK(back.to_string() == f.to_string());
  }
}

TEST_CASE("robustness examples") {
  const auto t = table();
  const Formula in = atom(t.at("inside"));
  CHECK(eval_robustness(always(0, 2, in), constant1(1.5), 0.0) == 0.5);
  CHECK(eval_boolean(in, constant1(1.5), 0.0));
  CHECK_FALSE(eval_boolean(negation(in), constant1(1.5), 0.0));
  CHECK(eval_robustness(make_true(), constant1(1.5), 0.0) == std::numeric_limits<double>::infinity());

  Rng rng(1);
  const Signal s = oracle::random_signal(rng, 1, 40, 0.1);
  for (std::size_t k = 0; k < s.size(); ++k)
    CHECK(eval_robustness(in, s, s.time_at(k)) == 2.0 - std::abs(s[k](0)));

  // Off-grid evaluation times and windows past the end are rejected.
  CHECK_THROWS_AS(eval_robustness(in, s, 0.05), DomainError);
  CHECK_THROWS_AS(eval_robustness(eventually(5, 6, in), s, 0.0), DomainError);
  const auto trace = robustness_trace(eventually(0, 1, in), s);
  CHECK(trace.clamped.back());
  CHECK_FALSE(trace.clamped.front());
  CHECK(std::isnan(robustness_trace(eventually(5, 6, in), s).values.front()));
}

TEST_CASE("robustness and satisfaction match the brute-force evaluators") {
  Rng rng(99);
  for (int i = 0; i < 150; ++i) {
    oracle::FormulaOptions o;
    o.dim = rng.range(1, 2);
    o.sign_safe_until = rng.coin();
    const Formula f = oracle::random_formula(rng, o);
    const auto need = static_cast<std::size_t>(std::llround(oracle::lookahead(f) / o.dt));
    const Signal s = oracle::random_signal(rng, o.dim, need + 8, o.dt);
    const auto rt = robustness_trace(f, s);
    const auto st = satisfaction_trace(f, s);
    for (long k = 0; k < 8; ++k) {
      CHECK(rt.values[static_cast<std::size_t>(k)] == oracle::robustness(f, s, k));
      CHECK((st.values[static_cast<std::size_t>(k)] == 1) == oracle::satisfied(f, s, k));
    }
  }
}

TEST_CASE("robustness sign agrees with satisfaction on until-free formulas") {
  Rng rng(4);
  int checked = 0;
  while (checked < 200) {
    oracle::FormulaOptions o;
    o.max_steps = 0;  // intervals [0,0] only
    const Formula f = oracle::random_formula(rng, o);
    const Signal s = oracle::random_signal(rng, 1, 5, 0.1);
    const double r = eval_robustness(f, s, 0.0);
    if (std::abs(r) <= 1e-9) continue;
    CHECK((r > 0) == eval_boolean(f, s, 0.0));
    ++checked;
  }
}

TEST_CASE("negation is an involution and wider until windows never lower robustness") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    oracle::FormulaOptions o;
    const Formula f = oracle::random_formula(rng, o);
    const Signal s = oracle::random_signal(rng, 1, 120, o.dt);
    CHECK(eval_robustness(negation(negation(f)), s, 0.0) == eval_robustness(f, s, 0.0));

    const Formula x = oracle::random_formula(rng, o);
    const Formula y = oracle::random_formula(rng, o);
    const double a = rng.range(0, 4) * o.dt, b = a + rng.range(0, 4) * o.dt;
    const double r = eval_robustness(until(a, b, x, y), s, 0.0);
    CHECK(eval_robustness(until(a, b + 3 * o.dt, x, y), s, 0.0) >= r);
    if (a > 0.0) CHECK(eval_robustness(until(a - o.dt, b, x, y), s, 0.0) >= r);
  }
}

TEST_CASE("until witness is the earliest maximiser") {
  const auto t = table();
  // s(t) = t on a 0.1 grid; q = ball(1, 1) peaks at t = 1.
  std::vector<Vector> xs;
  for (int k = 0; k <= 30; ++k) xs.push_back(Vector{{0.1 * k}});
  const Signal s(0.0, 0.1, xs);
  const Formula f = eventually(0, 3, atom(t.at("q")));
  const auto w = until_witness(f, s, 0.0);
  REQUIRE(w.has_value());
  CHECK(*w == doctest::Approx(1.0));
  CHECK(eval_robustness(f, s, 0.0) == doctest::Approx(1.0));

  const Signal flat = constant1(0.5);
  CHECK(*until_witness(eventually(0.2, 1.0, atom(t.at("q"))), flat, 0.0) == doctest::Approx(0.2));
  CHECK_THROWS_AS(until_witness(atom(t.at("q")), flat, 0.0), InputError);
}

TEST_CASE("certificate examples") {
  const auto t = table();
  const WeightMatrix q = WeightMatrix::identity(1);
  const auto c1 = certify(atom(t.at("inside")), q);
  CHECK(c1.L == 1.0);
  CHECK(c1.a == 0.0);
  CHECK(c1.b == 0.0);
  const auto c2 = certify(until(0, 2, atom(t.at("p")), atom(t.at("q"))), q);
  CHECK(c2.L == 1.0);
  CHECK(c2.a == 0.0);
  CHECK(c2.b == 2.0);
  const auto c3 = certify(conjunction(always(0, 10, atom(t.at("p"))), eventually(5, 20, atom(t.at("q")))), q);
  CHECK(c3.L == 1.0);
  CHECK(c3.a == 0.0);
  CHECK(c3.b == 20.0);

  // Nested until: [min(a1, a + a2), b + max(b1, b2)].
  const Formula inner1 = eventually(3, 4, atom(t.at("p")));  // [0, 4]
  const Formula inner2 = always(1, 2, atom(t.at("q")));      // [0, 2]
  const auto c4 = certify(until(5, 6, inner1, inner2), q);
  CHECK(c4.a == 0.0);
  CHECK(c4.b == 10.0);

  const auto steep = std::make_shared<const Predicate>(
      Predicate::custom("s", 1, [](const Vector& x) { return 4.0 * x(0); }, 4.0));
  const auto c5 = certify(disjunction(atom(steep), negation(atom(t.at("p")))), q);
  CHECK(c5.L == 4.0);

  CHECK_THROWS_AS(certify(atom(t.at("p")), WeightMatrix::identity(2)), InputError);

  const auto back = parse_certificate_json(certificate_json(c3));
  CHECK(back.L == c3.L);
  CHECK(back.a == c3.a);
  CHECK(back.b == c3.b);
  CHECK(certificate_json(back) == certificate_json(c3));
}

TEST_CASE("robustness respects the certified Lipschitz bound") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    oracle::FormulaOptions o;
    o.dim = rng.range(1, 2);
    o.sign_safe_until = false;
    const Formula f = oracle::random_formula(rng, o);
    const Vector w = Vector::Ones(o.dim);
    const auto cert = certify(f, WeightMatrix(w));
    const auto n = static_cast<std::size_t>(std::llround(cert.b / o.dt)) + 2;
    const Signal s = oracle::random_signal(rng, o.dim, n, o.dt);
    const Signal z = oracle::random_signal(rng, o.dim, n, o.dt);
    const double gap = std::abs(eval_robustness(f, s, 0.0) - eval_robustness(f, z, 0.0));
    const double bound = cert.L * semi_norm(signal_difference(s, z), cert.a, cert.b, cert.weights).value;
    CHECK(gap <= bound + 1e-9);
  }
}
