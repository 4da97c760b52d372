#pragma once

#include <string>
#include <utility>
#include <vector>

#include "chainlogic/formula.hpp"
#include "chainlogic/proofcheck.hpp"

namespace chainlogic {

struct NamedScript {
  std::string name;
  std::string description;
  ProofScript script;
};

namespace detail {

class ScriptBuilder {
 public:
  std::size_t axiom(Schema s, Channel k, const Formula& phi, const Formula& psi = Formula::bottom(), Channel n = 0) {
    AxiomInstance a{s, k, n, phi, psi};
    return add(instantiate(a), a);
  }
  std::size_t gateway(Channel k, Channel n, const Formula& phi) { return axiom(Schema::Gateway, k, phi, Formula::bottom(), n); }
  std::size_t taut(const Formula& f) { return add(f, Tautology{}); }
  std::size_t taut(std::string_view text) { return taut(parse(text)); }
  std::size_t nec(Channel k, std::size_t from) { return add(Formula::box(k, formula(from)), Necessitation{k, from}); }
  std::size_t mp(std::size_t from, std::size_t impl) {
    const Formula& f = formula(impl);
    return add(f.rhs(), ModusPonens{from, impl});
  }

  const Formula& formula(std::size_t id) const { return lines_.at(id - 1).formula; }

  ProofScript finish() && {
    ProofScript s;
    s.goal = lines_.back().formula;
    s.lines = std::move(lines_);
    return s;
  }

 private:
  std::size_t add(Formula f, Justification j) {
    lines_.push_back({lines_.size() + 1, std::move(f), std::move(j)});
    return lines_.size();
  }

  std::vector<ProofLine> lines_;
};

// (a -> b) -> ((b -> c) -> (a -> c))
inline Formula syllogism(const Formula& a, const Formula& b, const Formula& c) {
  using F = Formula;
  return F::implies(F::implies(a, b), F::implies(F::implies(b, c), F::implies(a, c)));
}

/// [k]phi -> [k]psi from a proof of phi -> psi, via necessitation and
/// distributivity. Returns the id of the resulting line.
inline std::size_t lift(ScriptBuilder& b, Channel k, std::size_t implication) {
  const Formula f = b.formula(implication);
  std::size_t boxed = b.nec(k, implication);
  std::size_t dist = b.axiom(Schema::Distributivity, k, f.lhs(), f.rhs());
  return b.mp(boxed, dist);
}

}  // namespace detail

/// Proof scripts for the transitivity and S5 principles, the gateway and
/// disjunction consequences, the box-over-conjunction lemma and a
/// three-disjunct splitting instance, at channels 0, 1, 2 (and 3).
inline std::vector<NamedScript> corpus() {
  using F = Formula;
  std::vector<NamedScript> out;

  {  // [0]p@0 -> [0][0]p@0
    detail::ScriptBuilder b;
    b.axiom(Schema::SelfAwareness, 0, parse("[0]p@0"));
    out.push_back({"prop1", "transitivity: [k]phi -> [k][k]phi", std::move(b).finish()});
  }
  {  // <0>p@1 -> [0]<0>p@1
    detail::ScriptBuilder b;
    b.axiom(Schema::SelfAwareness, 0, parse("<0>p@1"));
    out.push_back({"prop2", "S5 axiom: <k>phi -> [k]<k>phi", std::move(b).finish()});
  }
  {  // [0]<2>p@2 -> [1]<2>p@2
    detail::ScriptBuilder b;
    b.gateway(0, 1, parse("<2>p@2"));
    out.push_back({"prop3", "[k]<n>phi -> [m]<n>phi for k <= m <= n", std::move(b).finish()});
  }
  {  // [0][2]p@2 -> [0][1][2]p@2
    detail::ScriptBuilder b;
    const F inner = parse("[2]p@2");
    const F a = F::box(0, inner);                  // [0][2]p
    const F bb = F::box(0, a);                     // [0][0][2]p
    const F c = F::box(0, F::box(1, inner));       // [0][1][2]p
    std::size_t gw = b.gateway(0, 1, inner);       // [0][2]p -> [1][2]p
    std::size_t lifted = detail::lift(b, 0, gw);   // [0][0][2]p -> [0][1][2]p
    std::size_t trans = b.axiom(Schema::SelfAwareness, 0, a);  // [0][2]p -> [0][0][2]p
    std::size_t syl = b.taut(detail::syllogism(a, bb, c));
    std::size_t step = b.mp(trans, syl);
    b.mp(lifted, step);
    out.push_back({"prop4", "[k][n]phi -> [k][m][n]phi for k <= m <= n", std::move(b).finish()});
  }
  {  // [1]([0]p@0 | [2]q@2) -> ([1]p@0 | [1]q@2)
    detail::ScriptBuilder b;
    const F left = parse("[0]p@0");
    const F right = parse("[2]q@2");
    std::size_t disj = b.axiom(Schema::Disjunction, 1, left, right);
    std::size_t refl_l = b.axiom(Schema::Reflexivity, 0, left.body());
    std::size_t l = detail::lift(b, 1, refl_l);  // [1][0]p -> [1]p
    std::size_t refl_r = b.axiom(Schema::Reflexivity, 2, right.body());
    std::size_t r = detail::lift(b, 1, refl_r);  // [1][2]q -> [1]q
    const F d = b.formula(disj).lhs();
    const F x = F::box(1, left), y = F::box(1, right);
    const F u = F::box(1, left.body()), w = F::box(1, right.body());
    // (d -> x|y) -> ((x -> u) -> ((y -> w) -> (d -> u|w)))
    std::size_t t = b.taut(F::implies(F::implies(d, F::disjunction(x, y)),
                                      F::implies(F::implies(x, u), F::implies(F::implies(y, w),
                                                                              F::implies(d, F::disjunction(u, w))))));
    std::size_t s1 = b.mp(disj, t);
    std::size_t s2 = b.mp(l, s1);
    b.mp(r, s2);
    out.push_back({"prop5", "[m]([k]phi | [n]psi) -> ([m]phi | [m]psi) for k <= m <= n", std::move(b).finish()});
  }
  {  // [1](p@1 & q@1) -> ([1]p@1 & [1]q@1)
    detail::ScriptBuilder b;
    std::size_t first = detail::lift(b, 1, b.taut("(p@1 & q@1) -> p@1"));
    std::size_t second = detail::lift(b, 1, b.taut("(p@1 & q@1) -> q@1"));
    const F a = parse("[1](p@1 & q@1)");
    const F x = parse("[1]p@1"), y = parse("[1]q@1");
    std::size_t t = b.taut(F::implies(F::implies(a, x), F::implies(F::implies(a, y), F::implies(a, F::conjunction(x, y)))));
    std::size_t s = b.mp(first, t);
    b.mp(second, s);
    out.push_back({"lemma8", "[k](phi & psi) -> ([k]phi & [k]psi)", std::move(b).finish()});
  }
  {  // [1](p@0 | p@2 | p@3) -> ([1]p@0 | [1](p@2 | p@3)), with A = {0}, B = {2, 3}
    detail::ScriptBuilder b;
    const F all = parse("p@0 | p@2 | p@3");
    const F split = parse("p@0 | (p@2 | p@3)");
    std::size_t regroup = detail::lift(b, 1, b.taut(F::implies(all, split)));  // [1]all -> [1]split
    std::size_t disj = b.axiom(Schema::Disjunction, 1, parse("p@0"), parse("p@2 | p@3"));
    const F x = F::box(1, all), y = F::box(1, split), z = b.formula(disj).rhs();
    std::size_t syl = b.taut(detail::syllogism(x, y, z));
    std::size_t s = b.mp(regroup, syl);
    b.mp(disj, s);
    out.push_back({"lemma9_3way", "splitting a boxed three-way disjunction at k = 1 with A = {0}, B = {2, 3}",
                   std::move(b).finish()});
  }
  return out;
}

inline const NamedScript& corpus_script(const std::vector<NamedScript>& all, std::string_view name) {
  for (const auto& s : all)
    if (s.name == name) return s;
  throw std::out_of_range("no corpus script named '" + std::string(name) + "'");
}

}  // namespace chainlogic
