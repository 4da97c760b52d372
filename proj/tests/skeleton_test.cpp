#include <gtest/gtest.h>

#include "chainlogic/random.hpp"
#include "chainlogic/skeleton.hpp"
#include "support.hpp"

using namespace chainlogic;
using F = Formula;

using oracle::equivalent_by_table;

TEST(Skeleton, Templates) {
  Skeleton a(parse("[1]p@1 -> [1]p@1"));
  EXPECT_EQ(a.template_text(), "(X0 -> X0)");
  ASSERT_EQ(a.variable_count(), 1u);
  EXPECT_EQ(a.bindings()[0], parse("[1]p@1"));

  Skeleton b(F::bottom());
  EXPECT_EQ(b.template_text(), "false");
  EXPECT_EQ(b.variable_count(), 0u);

  Skeleton c(parse("p@0 -> [0]p@0"));
  EXPECT_EQ(c.template_text(), "(X0 -> X1)");
  EXPECT_EQ(c.variable_count(), 2u);
}

TEST(Skeleton, SubstituteRestores) {
  Rng rng(3);
  FormulaGenOptions o;
  o.channels = {0, 3};
  o.atom_names = {"p", "q"};
  o.max_depth = 6;
  for (int i = 0; i < 500; ++i) {
    F f = random_formula(rng, o);
    ASSERT_EQ(Skeleton(f).substitute(), f);
  }
}

TEST(Tautology, Examples) {
  EXPECT_TRUE(is_tautology(parse("((p@0 -> q@0) -> p@0) -> p@0")));
  EXPECT_TRUE(is_tautology(parse("(p@1 & q@2) -> p@1")));
  EXPECT_FALSE(is_tautology(parse("[1]p@1 -> p@1")));
  EXPECT_TRUE(is_tautology(parse("true")));
  EXPECT_FALSE(is_tautology(parse("false")));
  EXPECT_TRUE(is_tautology(parse("[1]([0]p@0 -> q@1) | ![1]([0]p@0 -> q@1)")));
}

TEST(Tautology, ManyVariables) {
  // p0 & ... & p9 -> p9 over ten distinct atoms exercises the block loop
  std::string text;
  for (int i = 0; i < 10; ++i) text += (i ? " & " : "") + std::string("p@") + std::to_string(i);
  EXPECT_TRUE(is_tautology(parse("(" + text + ") -> p@9")));
  EXPECT_FALSE(is_tautology(parse("(" + text + ") -> q@9")));
  EXPECT_FALSE(is_tautology(parse("p@0 | p@1 | p@2 | p@3 | p@4 | p@5 | p@6 | p@7")));
}

TEST(Tautology, VariableLimit) {
  std::string text = "p@0";
  for (int i = 1; i < 30; ++i) text += " | p@" + std::to_string(i);
  EXPECT_THROW(is_tautology(parse(text)), VariableLimitError);
  EXPECT_THROW(is_tautology(parse("p@0 | p@1 | p@2"), 2), VariableLimitError);
}

TEST(Tautology, AgreesWithReferenceTable) {
  Rng rng(21);
  FormulaGenOptions o;
  o.channels = {0, 1};
  o.atom_names = {"p"};
  o.max_depth = 5;
  int tautologies = 0;
  for (int i = 0; i < 2000; ++i) {
    F f = random_formula(rng, o);
    bool expected = equivalent_by_table(f, F::truth());
    ASSERT_EQ(is_tautology(f), expected) << render(f);
    tautologies += expected;
  }
  EXPECT_GT(tautologies, 0);
}

TEST(ScopedCnf, Examples) {
  ClauseList a = scoped_cnf(parse("p@1 | p@2"));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], (Clause{parse("p@1"), parse("p@2")}));

  ClauseList b = scoped_cnf(parse("[1]p@1 & p@2"));
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0], (Clause{parse("[1]p@1")}));
  EXPECT_EQ(b[1], (Clause{parse("p@2")}));

  ClauseList c = scoped_cnf(parse("!(p@1 & [2]q@2)"));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], (Clause{parse("!p@1"), parse("![2]q@2")}));
  EXPECT_TRUE(equivalent_by_table(cnf_formula(c), parse("!(p@1 & [2]q@2)")));
}

TEST(ScopedCnf, Degenerate) {
  EXPECT_TRUE(scoped_cnf(parse("true")).empty());
  EXPECT_TRUE(scoped_cnf(parse("p@0 | !p@0")).empty());
  ClauseList f = scoped_cnf(parse("false"));
  ASSERT_EQ(f.size(), 1u);
  EXPECT_TRUE(f[0].empty());
  EXPECT_EQ(cnf_formula(f), F::bottom());
  EXPECT_EQ(cnf_formula({}), F::truth());
}

TEST(ScopedCnf, LiteralsSingleChannelAndEquivalent) {
  Rng rng(99);
  FormulaGenOptions o;
  o.channels = {0, 3};
  o.atom_names = {"p", "q"};
  o.max_depth = 5;
  for (int i = 0; i < 500; ++i) {
    F f = random_formula(rng, o);
    ClauseList cnf = scoped_cnf(f);
    for (const Clause& c : cnf)
      for (const F& lit : c) ASSERT_LE(scope(lit).size(), 1u) << render(lit);
    F g = cnf_formula(cnf);
    ASSERT_TRUE(equivalent_by_table(f, g)) << render(f);
    ASSERT_TRUE(is_tautology(F::biconditional(f, g))) << render(f);
  }
}
