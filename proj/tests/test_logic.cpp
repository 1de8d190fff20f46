#include <gtest/gtest.h>

#include "hornopt/logic.hpp"
#include "hornopt/parser.hpp"
#include "support.hpp"

using namespace hornopt;

namespace {

Vocabulary graph_vocab() {
  Vocabulary v;
  v.add_relation("G", 2);
  v.add_constant("s");
  v.add_constant("t");
  return v;
}

Structure edge01() {
  Structure m(2);
  m.declare_relation("G", 2);
  m.add_tuple("G", {0, 1});
  return m;
}

}  // namespace

TEST(Parser, ForallDisjunction) {
  std::vector<RelationDecl> sig{{"P", 2}};
  auto f = parse_formula("forall x. forall y. !P(x,y) | G(s,y)", graph_vocab(), sig);
  auto expected = Formula::forall(
      "x", Formula::forall(
               "y", Formula::disjunction(
                        Formula::negation(Formula::atom(
                            "P", {Term::variable("x"), Term::variable("y")})),
                        Formula::atom("G", {Term::constant("s"), Term::variable("y")}))));
  EXPECT_TRUE(equivalent_trees(f, expected));
}

TEST(Parser, ArityMismatch) {
  std::vector<RelationDecl> sig{{"P", 2}};
  try {
    parse_formula("P(x)", graph_vocab(), sig, std::vector<std::string>{"x"});
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("arity mismatch"), std::string::npos);
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 1u);
  }
}

TEST(Parser, TransitivityFormula) {
  std::vector<RelationDecl> sig{{"P", 3}};
  auto f = parse_formula(
      "forall u1. forall u2. forall u3. forall w3. "
      "(P(u1,u2,w3) & P(u2,u3,w3)) -> P(u1,u3,w3)",
      graph_vocab(), sig);
  const Formula* body = f.get();
  for (int i = 0; i < 4; ++i) {
    ASSERT_EQ(body->kind(), Formula::Kind::forall);
    body = body->body().get();
  }
  ASSERT_EQ(body->kind(), Formula::Kind::implication);
  EXPECT_EQ(body->left()->kind(), Formula::Kind::conjunction);
  EXPECT_EQ(body->right()->name(), "P");
}

TEST(Parser, Precedence) {
  Vocabulary v;
  v.add_relation("A", 1);
  v.add_relation("B", 1);
  v.add_relation("D", 1);
  std::vector<std::string> free{"x"};
  auto f = parse_formula("A(x) | B(x) & D(x) -> A(x) -> B(x)", v, {}, free);
  ASSERT_EQ(f->kind(), Formula::Kind::implication);
  EXPECT_EQ(f->left()->kind(), Formula::Kind::disjunction);
  EXPECT_EQ(f->left()->right()->kind(), Formula::Kind::conjunction);
  EXPECT_EQ(f->right()->kind(), Formula::Kind::implication);

  auto g = parse_formula("A(x) -> B(x) <-> D(x)", v, {}, free);
  EXPECT_EQ(g->kind(), Formula::Kind::biconditional);
  auto h = parse_formula("!A(x) & B(x)", v, {}, free);
  EXPECT_EQ(h->kind(), Formula::Kind::conjunction);
}

TEST(Parser, QuantifierExtendsRight) {
  Vocabulary v;
  v.add_relation("A", 1);
  auto f = parse_formula("forall x. A(x) & A(x)", v);
  ASSERT_EQ(f->kind(), Formula::Kind::forall);
  EXPECT_EQ(f->body()->kind(), Formula::Kind::conjunction);
}

TEST(Parser, Errors) {
  Vocabulary v;
  v.add_relation("A", 1);
  EXPECT_THROW(parse_formula("Q(x)", v, {}, std::vector<std::string>{"x"}), ParseError);
  EXPECT_THROW(parse_formula("A(y)", v), ParseError);
  EXPECT_THROW(parse_formula("forall x. A(x", v), ParseError);
  EXPECT_THROW(parse_formula("forall x A(x)", v), ParseError);
  EXPECT_THROW(parse_formula("A(x) $", v, {}, std::vector<std::string>{"x"}), ParseError);
  try {
    parse_formula("forall x.\n  A(x) & B(x)", v);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 10u);
  }
}

TEST(Parser, PrintRoundTrip) {
  std::vector<RelationDecl> sig{{"P", 3}};
  const char* texts[] = {
      "forall x1. forall x2. forall w. P(x1,x2,w) -> G(s,w)",
      "forall i. forall j. forall w1. forall w2. (P(i,j,w1) & P(i,j,w2) & G(i,j)) -> w1 = w2",
      "exists x. !(G(x,s) <-> G(s,x)) | x != t",
      "(forall x. G(x,x)) -> G(s,t) -> G(t,s)",
  };
  for (const char* t : texts) {
    auto f = parse_formula(t, graph_vocab(), sig);
    auto g = parse_formula(to_string(f), graph_vocab(), sig);
    EXPECT_TRUE(equivalent_trees(f, g)) << t << " printed as " << to_string(f);
  }
}

TEST(Evaluate, Basics) {
  Vocabulary v;
  v.add_relation("G", 2);
  Structure m = edge01();
  EXPECT_TRUE(evaluate(parse_formula("G(0,1)", v), m));
  EXPECT_TRUE(evaluate(parse_formula("forall x. x = x", v), m));
  EXPECT_FALSE(evaluate(parse_formula("exists x. exists y. G(x,y) & G(y,x)", v), m));
}

TEST(Evaluate, Errors) {
  Vocabulary v;
  v.add_relation("G", 2);
  Structure m = edge01();
  auto free = parse_formula("G(x,x)", v, {}, std::vector<std::string>{"x"});
  EXPECT_THROW(evaluate(free, m), EvaluationError);
  std::vector<RelationDecl> sig{{"S", 1}};
  auto so = parse_formula("exists x. S(x)", v, sig);
  EXPECT_THROW(evaluate(so, m), EvaluationError);
  SecondOrderInterp i;
  i.declare("S");
  i.insert("S", {1});
  EXPECT_TRUE(evaluate(so, m, i));
}

TEST(Structure, Validation) {
  EXPECT_THROW(Structure(0), InputError);
  Structure m(2);
  m.declare_relation("G", 2);
  EXPECT_THROW(m.add_tuple("G", {0, 2}), InputError);
  EXPECT_THROW(m.add_tuple("G", {0}), InputError);
  EXPECT_THROW(m.add_tuple("H", {0}), InputError);

  Vocabulary v = graph_vocab();
  Structure unbound(2);
  EXPECT_THROW(unbound.conform_to(v), InputError);
  Structure wrong(2);
  wrong.declare_relation("G", 3);
  wrong.bind_constant("s", 0);
  wrong.bind_constant("t", 1);
  EXPECT_THROW(wrong.conform_to(v), InputError);
}

TEST(Structure, SuccessorIsBuiltIn) {
  Vocabulary v;
  v.enable_successor();
  Structure m(4);
  m.conform_to(v);
  auto f = parse_formula("succ(x,y)", v, {}, std::vector<std::string>{"x", "y"});
  for (Element i = 0; i < 4; ++i)
    for (Element j = 0; j < 4; ++j)
      EXPECT_EQ(evaluate(f, m, Assignment{{"x", i}, {"y", j}}), j == i + 1);

  Structure user(2);
  user.declare_relation("succ", 2);
  EXPECT_THROW(user.conform_to(v), InputError);
  EXPECT_THROW(v.add_relation("succ", 2), InputError);
}

TEST(Structure, BasicSortComplementsWeights) {
  Vocabulary v;
  v.enable_basic_sort();
  Structure m(4);
  m.set_weight(3, 10);
  m.conform_to(v);
  EXPECT_TRUE(m.holds("C", std::vector<Element>{0}));
  EXPECT_FALSE(m.holds("C", std::vector<Element>{3}));
}

TEST(Tuples, RankUnrank) {
  for (std::uint64_t r = 0; r < 27; ++r)
    EXPECT_EQ(tuple_rank(tuple_unrank(r, 3, 3), 3), r);
  EXPECT_EQ(tuple_unrank(5, 2, 3), (Tuple{1, 2}));
  EXPECT_FALSE(tuple_count(1u << 20, 4).has_value());
}

TEST(EvaluateProperty, DoubleNegationAndDeMorgan) {
  proptest::RandomWorld w;
  proptest::Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    std::size_t n = 1 + proptest::RandomWorld::pick(rng, 3);
    Structure m = w.structure(rng, n);
    AtomIndex index(w.so_sig, n);
    SecondOrderInterp so = index.interpretation(w.bits(rng, index));
    Assignment a = w.assignment(rng, n);
    auto f = w.formula(rng, 3);
    auto g = w.formula(rng, 3);
    bool fv = evaluate(f, m, so, a);
    EXPECT_EQ(evaluate(Formula::negation(Formula::negation(f)), m, so, a), fv);
    EXPECT_EQ(evaluate(Formula::negation(Formula::conjunction(f, g)), m, so, a),
              evaluate(Formula::disjunction(Formula::negation(f), Formula::negation(g)),
                       m, so, a));
    EXPECT_EQ(evaluate(f, m, so, a), fv);
  }
}
