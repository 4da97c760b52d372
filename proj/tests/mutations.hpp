#pragma once

// Single-line mutations of proof scripts, each paired with the line id at
// which the checker must reject the result.

#include <string>
#include <variant>
#include <vector>

#include "chainlogic/proofcheck.hpp"

namespace mutations {

using namespace chainlogic;

struct Mutant {
  std::string label;
  ProofScript script;
  std::size_t expected_line;
};

/// For every modus ponens line: cite a different earlier line as the minor
/// premise. For every axiom with a side condition: move a channel so the
/// condition fails, rewriting the formula to the new instance. For every
/// necessitation: turn the cited line into a premise.
inline std::vector<Mutant> mutate(const std::string& name, const ProofScript& s) {
  std::vector<Mutant> out;
  for (std::size_t i = 0; i < s.lines.size(); ++i) {
    const ProofLine& line = s.lines[i];
    if (const auto* mp = std::get_if<ModusPonens>(&line.rule)) {
      const Formula& cited = s.lines[mp->from - 1].formula;
      for (std::size_t j = 0; j < i; ++j) {
        if (s.lines[j].formula == cited || s.lines[j].id == mp->impl) continue;
        Mutant m{name + ": line " + std::to_string(line.id) + " cites line " + std::to_string(s.lines[j].id), s,
                 line.id};
        std::get<ModusPonens>(m.script.lines[i].rule).from = s.lines[j].id;
        out.push_back(std::move(m));
        break;
      }
    } else if (const auto* ax = std::get_if<AxiomInstance>(&line.rule)) {
      AxiomInstance bad = *ax;
      switch (ax->schema) {
        case Schema::Gateway:
          bad.n = 10;
          break;
        case Schema::Disjunction:
        case Schema::SelfAwareness:
          bad.k = 10;
          break;
        default:
          continue;
      }
      if (side_condition_holds(bad)) continue;
      Mutant m{name + ": " + std::string(schema_name(ax->schema)) + " side condition broken at line " +
                   std::to_string(line.id),
               s, line.id};
      m.script.lines[i].rule = bad;
      m.script.lines[i].formula = instantiate(bad);
      out.push_back(std::move(m));
    } else if (const auto* nec = std::get_if<Necessitation>(&line.rule)) {
      Mutant m{name + ": necessitation at line " + std::to_string(line.id) + " on a premise", s, line.id};
      m.script.premises_allowed = true;
      m.script.lines[nec->from - 1].rule = Premise{};
      out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace mutations
