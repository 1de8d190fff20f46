#include <gtest/gtest.h>

#include "hornopt/analysis.hpp"
#include "hornopt/parser.hpp"
#include "support.hpp"

using namespace hornopt;

namespace {

struct Fixture {
  Vocabulary vocab;
  std::vector<RelationDecl> sig{{"P", 1}, {"Q", 1}, {"S", 2}, {"R3", 3}};

  Fixture() {
    vocab.add_relation("G", 2);
    vocab.add_relation("A", 1);
    vocab.add_relation("B", 1);
    vocab.add_constant("s");
    vocab.add_constant("t");
  }

  FormulaPtr parse(const std::string& text, std::vector<std::string> free = {}) const {
    return parse_formula(text, vocab, sig, free);
  }
};

std::string prefix_string(const PrenexForm& p) {
  std::string out;
  for (const auto& b : p.prefix)
    out += (b.quantifier == Quantifier::forall ? "A" : "E") + b.variable + " ";
  return out;
}

}  // namespace

TEST(Pnf, QuantifierFreeIsUnchanged) {
  Fixture fx;
  auto f = fx.parse("P(x) -> G(x,s)", {"x"});
  PrenexForm p = to_pnf(f);
  EXPECT_TRUE(p.prefix.empty());
  EXPECT_EQ(classify_prefix(p), QuantClass::sigma0);
}

TEST(Pnf, RectifiesSharedBinders) {
  Fixture fx;
  PrenexForm p = to_pnf(fx.parse("(forall x. P(x)) & (forall x. Q(x))"));
  EXPECT_EQ(prefix_string(p), "Ax Ax' ");
  EXPECT_EQ(to_string(p.matrix), "P(x) & Q(x')");
}

TEST(Pnf, AntecedentFlipsPolarity) {
  Fixture fx;
  PrenexForm p = to_pnf(fx.parse("forall x. (exists y. G(x,y)) -> P(x)"));
  EXPECT_EQ(prefix_string(p), "Ax Ay ");
  EXPECT_EQ(classify_prefix(p), QuantClass::pi1);
  EXPECT_EQ(to_string(p.matrix), "G(x,y) -> P(x)");
}

TEST(Pnf, NegationFlips) {
  Fixture fx;
  PrenexForm p = to_pnf(fx.parse("!(forall x. exists y. S(x,y))"));
  EXPECT_EQ(prefix_string(p), "Ex Ay ");
  EXPECT_EQ(classify_prefix(p), QuantClass::sigma2);
}

TEST(Pnf, FreeVariablesAreNotCaptured) {
  Fixture fx;
  auto f = fx.parse("P(x) & (exists x. Q(x))", {"x"});
  PrenexForm p = to_pnf(f);
  ASSERT_EQ(p.prefix.size(), 1u);
  EXPECT_NE(p.prefix[0].variable, "x");
  EXPECT_EQ(free_variables(p.to_formula()), std::vector<std::string>{"x"});
}

TEST(Pnf, BiconditionalExpandsBothWays) {
  Fixture fx;
  PrenexForm p = to_pnf(fx.parse("(exists x. P(x)) <-> Q(s)"));
  // One copy of the quantifier lands in each polarity.
  EXPECT_EQ(classify_prefix(p), QuantClass::pi2);
}

TEST(Cnf, Examples) {
  Fixture fx;
  std::vector<RelationDecl> sig{{"P3", 3}};
  Vocabulary v = fx.vocab;
  auto phi1 = parse_formula("!P3(x1,x2,w) | G(s,w)", v, sig, std::vector<std::string>{"x1", "x2", "w"});
  ClauseSet cs = matrix_to_cnf(phi1);
  ASSERT_EQ(cs.clauses.size(), 1u);
  EXPECT_EQ(cs.clauses[0].literals.size(), 2u);
  EXPECT_TRUE(horn_check(cs, sig).horn);

  ClauseSet iff = matrix_to_cnf(fx.parse("A(s) <-> B(s)"));
  ASSERT_EQ(iff.clauses.size(), 2u);
  EXPECT_EQ(iff.clauses[0].to_string(), "!A(s) | B(s)");
  EXPECT_EQ(iff.clauses[1].to_string(), "A(s) | !B(s)");

  ClauseSet dist = matrix_to_cnf(fx.parse("(A(s) & B(s)) | P(s)"));
  ASSERT_EQ(dist.clauses.size(), 2u);
  EXPECT_EQ(dist.clauses[0].to_string(), "A(s) | P(s)");
  EXPECT_EQ(dist.clauses[1].to_string(), "B(s) | P(s)");
}

TEST(Cnf, RejectsQuantifiersAndGuardsSize) {
  Fixture fx;
  EXPECT_THROW(matrix_to_cnf(fx.parse("forall x. P(x)")), InputError);
  // (a1 & b1) | ... | (a12 & b12) distributes into 2^12 clauses.
  std::string big;
  for (int i = 0; i < 12; ++i) big += std::string(i ? " | " : "") + "(A(s) & B(t))";
  CnfOptions opt;
  opt.max_clauses = 100;
  EXPECT_THROW(matrix_to_cnf(fx.parse(big), opt), LimitError);
}

TEST(Cnf, TrivialClauses) {
  Fixture fx;
  ClauseSet taut = matrix_to_cnf(fx.parse("A(s) | !A(s) | A(s)"));
  ASSERT_EQ(taut.clauses.size(), 1u);
  EXPECT_EQ(taut.clauses[0].to_string(), "A(s) | !A(s)");
  EXPECT_EQ(matrix_to_cnf(fx.parse("A(s) & !A(s)")).clauses.size(), 2u);
}

TEST(Horn, Examples) {
  Fixture fx;
  HornReport bad = horn_check(matrix_to_cnf(fx.parse("S(x,z) | S(s,t)", {"x", "z"})), fx.sig);
  EXPECT_FALSE(bad.horn);
  ASSERT_TRUE(bad.offending_index.has_value());
  EXPECT_EQ(bad.positive_so_literals.size(), 2u);
  EXPECT_NE(bad.describe().find("S(s,t)"), std::string::npos);

  EXPECT_TRUE(horn_check(matrix_to_cnf(fx.parse("G(s,t) | A(s) | !P(s)")), fx.sig).horn);
  EXPECT_TRUE(horn_check(matrix_to_cnf(fx.parse("P(s) | s = t | G(s,s)")), fx.sig).horn);
}

TEST(Classify, Prefixes) {
  Fixture fx;
  EXPECT_EQ(classify_prefix(to_pnf(fx.parse("forall x. exists y. S(x,y)"))), QuantClass::pi2);
  EXPECT_EQ(classify_prefix(to_pnf(fx.parse("exists x. exists y. S(x,y)"))), QuantClass::sigma1);
  EXPECT_EQ(classify_prefix(to_pnf(fx.parse("forall x. exists y. forall z. R3(x,y,z)"))),
            QuantClass::other);
  EXPECT_EQ(to_string(QuantClass::pi1), "PI1");
}

TEST(PnfProperty, SemanticEquivalence) {
  proptest::RandomWorld w;
  proptest::Rng rng(23);
  for (int i = 0; i < 300; ++i) {
    std::size_t n = 1 + proptest::RandomWorld::pick(rng, 3);
    Structure m = w.structure(rng, n);
    AtomIndex index(w.so_sig, n);
    SecondOrderInterp so = index.interpretation(w.bits(rng, index));
    Assignment a = w.assignment(rng, n);
    auto f = w.formula(rng, 4);
    PrenexForm p = to_pnf(f);
    for (const auto& b : p.prefix) ASSERT_TRUE(b.variable.size() > 0);
    EXPECT_EQ(evaluate(f, m, so, a), evaluate(p.to_formula(), m, so, a)) << to_string(f);
    Assignment full = a;
    for (const auto& v : p.variables()) full[v] = static_cast<Element>(proptest::RandomWorld::pick(rng, n));
    EXPECT_EQ(evaluate(p.matrix, m, so, full),
              proptest::evaluate_clauses(matrix_to_cnf(p.matrix), m, so, full));
  }
}
