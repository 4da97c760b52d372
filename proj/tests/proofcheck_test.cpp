#include <gtest/gtest.h>

#include <fstream>

#include "chainlogic/corpus.hpp"
#include "chainlogic/json_io.hpp"
#include "chainlogic/proofcheck.hpp"
#include "chainlogic/random.hpp"
#include "chainlogic/search.hpp"
#include "chainlogic/semantics.hpp"
#include "mutations.hpp"

using namespace chainlogic;
using F = Formula;

namespace {

AxiomInstance ax(Schema s, Channel k, const char* phi, const char* psi = "false", Channel n = 0) {
  return AxiomInstance{s, k, n, parse(phi), parse(psi)};
}

}  // namespace

TEST(MatchAxiom, Examples) {
  // [k][k]phi from [k]phi
  EXPECT_TRUE(match_axiom(ax(Schema::SelfAwareness, 0, "[0]p@0"), parse("[0]p@0 -> [0][0]p@0")));
  EXPECT_FALSE(match_axiom(ax(Schema::Gateway, 1, "p@0", "false", 2), parse("[1]p@0 -> [2]p@0")));
  EXPECT_TRUE(match_axiom(ax(Schema::Gateway, 0, "<2>p@2", "false", 1), parse("[0]<2>p@2 -> [1]<2>p@2")));
  EXPECT_TRUE(match_axiom(ax(Schema::Disjunction, 1, "[0]p@0", "[2]q@2"),
                          parse("[1]([0]p@0 | [2]q@2) -> ([1][0]p@0 | [1][2]q@2)")));
  EXPECT_TRUE(match_axiom("distributivity", ax(Schema::Reflexivity, 3, "p@1", "q@2"),
                          parse("[3](p@1 -> q@2) -> ([3]p@1 -> [3]q@2)")));
  EXPECT_TRUE(match_axiom("reflexivity", ax(Schema::Reflexivity, 3, "p@1"), parse("[3]p@1 -> p@1")));
  EXPECT_THROW(match_axiom("transitivity", ax(Schema::Reflexivity, 3, "p@1"), parse("p@1")), UnknownSchema);
}

TEST(MatchAxiom, WrongShapeRejected) {
  EXPECT_FALSE(match_axiom(ax(Schema::Reflexivity, 3, "p@1"), parse("[2]p@1 -> p@1")));
  EXPECT_FALSE(match_axiom(ax(Schema::Reflexivity, 3, "p@1"), parse("p@1 -> [3]p@1")));
  EXPECT_FALSE(match_axiom(ax(Schema::SelfAwareness, 1, "p@1"), parse("p@1 -> [2]p@1")));
  EXPECT_FALSE(match_axiom(ax(Schema::Disjunction, 1, "p@0", "p@2"), parse("[1](p@0 | p@2) -> ([1]p@2 | [1]p@0)")));
}

TEST(SideConditions, GatewayBoundaries) {
  // k < n <= min(S)
  EXPECT_TRUE(side_condition_holds(ax(Schema::Gateway, 0, "p@2", "false", 2)));
  EXPECT_FALSE(side_condition_holds(ax(Schema::Gateway, 0, "p@2", "false", 3)));
  EXPECT_FALSE(side_condition_holds(ax(Schema::Gateway, 2, "p@2", "false", 2)));
  // max(S) <= n < k
  EXPECT_TRUE(side_condition_holds(ax(Schema::Gateway, 3, "p@0 | q@1", "false", 1)));
  EXPECT_FALSE(side_condition_holds(ax(Schema::Gateway, 3, "p@0 | q@2", "false", 1)));
  EXPECT_FALSE(side_condition_holds(ax(Schema::Gateway, 1, "p@0", "false", 1)));
  // scope taken at the outermost level only
  EXPECT_TRUE(side_condition_holds(ax(Schema::Gateway, 0, "[2][0]p@0", "false", 1)));
  // empty scope: either direction is allowed
  EXPECT_TRUE(side_condition_holds(ax(Schema::Gateway, 0, "true", "false", 5)));
  EXPECT_TRUE(side_condition_holds(ax(Schema::Gateway, 5, "false", "false", 0)));
}

TEST(SideConditions, DisjunctionAndSelfAwareness) {
  EXPECT_TRUE(side_condition_holds(ax(Schema::Disjunction, 1, "p@0", "p@2")));
  EXPECT_TRUE(side_condition_holds(ax(Schema::Disjunction, 1, "p@1", "p@1")));
  EXPECT_FALSE(side_condition_holds(ax(Schema::Disjunction, 0, "p@1", "p@2")));
  EXPECT_FALSE(side_condition_holds(ax(Schema::Disjunction, 1, "p@2", "p@0")));
  EXPECT_TRUE(side_condition_holds(ax(Schema::Disjunction, 1, "true", "p@1")));
  EXPECT_TRUE(side_condition_holds(ax(Schema::SelfAwareness, 1, "[1]p@0 -> p@1")));
  EXPECT_FALSE(side_condition_holds(ax(Schema::SelfAwareness, 1, "[2]p@1")));
  EXPECT_TRUE(side_condition_holds(ax(Schema::SelfAwareness, 7, "true")));
}

TEST(Corpus, AllAccepted) {
  auto all = corpus();
  std::set<std::string> names;
  for (const auto& s : all) {
    names.insert(s.name);
    Verdict v = check_script(s.script);
    EXPECT_TRUE(v.accepted) << s.name << ": line " << v.failing_line.value_or(0) << ": " << v.reason;
  }
  EXPECT_EQ(names, (std::set<std::string>{"prop1", "prop2", "prop3", "prop4", "prop5", "lemma8", "lemma9_3way"}));
  EXPECT_EQ(corpus_script(all, "prop1").script.goal, parse("[0]p@0 -> [0][0]p@0"));
  EXPECT_EQ(corpus_script(all, "lemma8").script.goal, parse("[1](p@1 & q@1) -> ([1]p@1 & [1]q@1)"));
  EXPECT_EQ(corpus_script(all, "prop4").script.goal, parse("[0][2]p@2 -> [0][1][2]p@2"));
  EXPECT_EQ(corpus_script(all, "prop5").script.goal, parse("[1]([0]p@0 | [2]q@2) -> ([1]p@0 | [1]q@2)"));
  EXPECT_EQ(corpus_script(all, "lemma9_3way").script.goal, parse("[1](p@0 | p@2 | p@3) -> ([1]p@0 | [1](p@2 | p@3))"));
  EXPECT_THROW(corpus_script(all, "prop9"), std::out_of_range);
}

TEST(Corpus, MutantsRejectedAtMutatedLine) {
  std::size_t total = 0;
  for (const auto& s : corpus()) {
    for (const auto& m : mutations::mutate(s.name, s.script)) {
      Verdict v = check_script(m.script);
      EXPECT_FALSE(v.accepted) << m.label;
      EXPECT_EQ(v.failing_line, m.expected_line) << m.label << ": " << v.reason;
      ++total;
    }
  }
  EXPECT_GE(total, 10u);
}

TEST(Corpus, FilesMatchLibrary) {
  for (const auto& s : corpus()) {
    std::string path = std::string(CHAINLOGIC_SOURCE_DIR) + "/corpus/" + s.name + ".json";
    ProofScript loaded = load_script(path);
    EXPECT_EQ(loaded, s.script) << path;
  }
}

TEST(CheckScript, TaintBlocksNecessitation) {
  ProofScript s;
  s.premises_allowed = true;
  s.lines = {{1, parse("p@0"), Premise{}}, {2, parse("[0]p@0"), Necessitation{0, 1}}};
  s.goal = parse("[0]p@0");
  Verdict v = check_script(s);
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.failing_line, 2u);
  EXPECT_TRUE(v.lines[0].tainted);

  // taint flows through modus ponens
  s.lines = {{1, parse("p@0"), Premise{}},
             {2, parse("p@0 -> (q@0 -> p@0)"), Tautology{}},
             {3, parse("q@0 -> p@0"), ModusPonens{1, 2}},
             {4, parse("[1](q@0 -> p@0)"), Necessitation{1, 3}}};
  s.goal = parse("[1](q@0 -> p@0)");
  v = check_script(s);
  EXPECT_EQ(v.failing_line, 4u);
  EXPECT_FALSE(v.lines[1].tainted);
  EXPECT_TRUE(v.lines[2].tainted);

  // untainted necessitation is fine
  s.lines = {{1, parse("p@0 -> p@0"), Tautology{}}, {2, parse("[3](p@0 -> p@0)"), Necessitation{3, 1}}};
  s.goal = parse("[3](p@0 -> p@0)");
  EXPECT_TRUE(check_script(s).accepted);

  // premises without permission
  s.premises_allowed = false;
  s.lines = {{1, parse("p@0"), Premise{}}};
  s.goal = parse("p@0");
  EXPECT_EQ(check_script(s).failing_line, 1u);
  s.premises_allowed = true;
  EXPECT_TRUE(check_script(s).accepted);
}

TEST(CheckScript, MalformedReferencesAndIds) {
  ProofScript s;
  s.goal = parse("p@0 -> p@0");
  s.lines = {{1, parse("p@0 -> p@0"), ModusPonens{1, 2}}};
  EXPECT_EQ(check_script(s).failing_line, 1u);
  s.lines = {{1, parse("p@0 -> p@0"), Necessitation{0, 7}}};
  EXPECT_EQ(check_script(s).failing_line, 1u);
  s.lines = {{2, parse("p@0 -> p@0"), Tautology{}}, {2, parse("p@0 -> p@0"), Tautology{}}};
  EXPECT_EQ(check_script(s).failing_line, 2u);
  s.lines = {{0, parse("p@0 -> p@0"), Tautology{}}};
  EXPECT_EQ(check_script(s).failing_line, 0u);
  s.lines = {};
  EXPECT_FALSE(check_script(s).accepted);
  // goal mismatch is reported at the last line
  s.lines = {{1, parse("q@0 -> q@0"), Tautology{}}};
  Verdict v = check_script(s);
  EXPECT_EQ(v.failing_line, 1u);
  EXPECT_EQ(v.reason, "last line does not match the goal");
  // a failed line cannot be cited later
  s.goal = parse("[0]p@0");
  s.lines = {{1, parse("p@0"), Tautology{}}, {2, parse("[0]p@0"), Necessitation{0, 1}}};
  v = check_script(s);
  EXPECT_EQ(v.failing_line, 1u);
  EXPECT_EQ(v.lines[1].status, LineDiagnostic::Status::Failed);
}

TEST(CheckScript, VariableLimit) {
  ProofScript s;
  s.goal = parse("p@0 | p@1 | p@2 | !p@0");
  s.lines = {{1, s.goal, Tautology{}}};
  EXPECT_TRUE(check_script(s).accepted);
  CheckOptions o;
  o.variable_limit = 2;
  EXPECT_EQ(check_script(s, o).failing_line, 1u);
}

// Every schema instance is the formula it claims, and mutations of any part
// change it.
TEST(Schemas, InstancesAreFaithful) {
  Rng rng(17);
  FormulaGenOptions o;
  o.channels = {0, 3};
  o.atom_names = {"p", "q"};
  o.max_depth = 3;
  for (int i = 0; i < 500; ++i) {
    AxiomInstance a{static_cast<Schema>(rng.below(5)), rng.between(0, 3), rng.between(0, 3), random_formula(rng, o),
                    random_formula(rng, o)};
    F f = instantiate(a);
    ASSERT_EQ(match_axiom(a, f), side_condition_holds(a));
    AxiomInstance moved = a;
    moved.k = a.k + 1;
    ASSERT_NE(instantiate(moved), f);
    AxiomInstance other = a;
    other.phi = F::negation(a.phi);
    ASSERT_NE(instantiate(other), f);
    ASSERT_FALSE(match_axiom(a, F::negation(f)));
  }
}

// Lines of accepted premise-free scripts hold at every run of random
// protocols over channels 0..3.
TEST(Soundness, AcceptedLinesAreValid) {
  SearchBounds b;
  b.num_channels = 4;
  b.max_values = 2;
  b.atoms_per_channel = 2;
  Rng rng(23);
  auto all = corpus();
  for (int trial = 0; trial < 150; ++trial) {
    EvalContext ctx(to_protocol(ProtocolEnumerator::random_candidate(rng, b), 2));
    for (const auto& s : all)
      for (const auto& line : s.script.lines) ASSERT_TRUE(valid_in(ctx, line.formula)) << s.name << " line " << line.id;
  }
}

TEST(Json, ScriptRoundTrip) {
  for (const auto& s : corpus()) {
    auto j = script_to_json(s.script);
    EXPECT_EQ(script_from_json(j), s.script);
    EXPECT_EQ(script_from_text(j.dump()), s.script);
  }
}

TEST(Json, ScriptErrors) {
  EXPECT_THROW(script_from_text("{"), FormatError);
  EXPECT_THROW(script_from_text(R"({"goal": "p@0"})"), FormatError);
  EXPECT_THROW(script_from_text(R"({"goal": "p@", "lines": []})"), FormatError);
  EXPECT_THROW(script_from_text(R"({"goal": "p@0", "lines": [{"id": 1, "formula": "p@0", "rule": {"type": "magic"}}]})"),
               FormatError);
  EXPECT_THROW(
      script_from_text(R"({"goal": "p@0", "lines": [{"id": 1, "formula": "p@0", "rule": {"type": "axiom", "schema": "gateway", "k": 0, "phi": "p@0"}}]})"),
      FormatError);
  EXPECT_THROW(
      script_from_text(R"({"goal": "p@0", "lines": [{"id": 1, "formula": "p@0", "rule": {"type": "axiom", "schema": "k4", "k": 0, "phi": "p@0"}}]})"),
      FormatError);
  EXPECT_THROW(script_from_text(R"({"goal": "p@0", "lines": [], "extra": 1})"), FormatError);
  EXPECT_THROW(load_script("/nonexistent/script.json"), FormatError);
}
