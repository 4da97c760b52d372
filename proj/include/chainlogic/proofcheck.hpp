#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chainlogic/formula.hpp"
#include "chainlogic/skeleton.hpp"

namespace chainlogic {

enum class Schema { Distributivity, Reflexivity, SelfAwareness, Gateway, Disjunction };

class UnknownSchema : public std::invalid_argument {
 public:
  explicit UnknownSchema(const std::string& name) : std::invalid_argument("unknown axiom schema '" + name + "'") {}
};

inline std::string_view schema_name(Schema s) {
  switch (s) {
    case Schema::Distributivity:
      return "distributivity";
    case Schema::Reflexivity:
      return "reflexivity";
    case Schema::SelfAwareness:
      return "self_awareness";
    case Schema::Gateway:
      return "gateway";
    case Schema::Disjunction:
      return "disjunction";
  }
  return "?";
}

inline Schema schema_from_name(std::string_view name) {
  for (Schema s : {Schema::Distributivity, Schema::Reflexivity, Schema::SelfAwareness, Schema::Gateway,
                   Schema::Disjunction})
    if (schema_name(s) == name) return s;
  throw UnknownSchema(std::string(name));
}

/// Explicit instantiation of an axiom schema. `n` is used by gateway only,
/// `psi` by distributivity and disjunction.
struct AxiomInstance {
  Schema schema = Schema::Reflexivity;
  Channel k = 0;
  Channel n = 0;
  Formula phi;
  Formula psi;

  friend bool operator==(const AxiomInstance&, const AxiomInstance&) = default;
};

/// The formula an instance stands for (sugar expanded).
inline Formula instantiate(const AxiomInstance& a) {
  using F = Formula;
  switch (a.schema) {
    case Schema::Distributivity:
      return F::implies(F::box(a.k, F::implies(a.phi, a.psi)), F::implies(F::box(a.k, a.phi), F::box(a.k, a.psi)));
    case Schema::Reflexivity:
      return F::implies(F::box(a.k, a.phi), a.phi);
    case Schema::SelfAwareness:
      return F::implies(a.phi, F::box(a.k, a.phi));
    case Schema::Gateway:
      return F::implies(F::box(a.k, a.phi), F::box(a.n, a.phi));
    case Schema::Disjunction:
      return F::implies(F::box(a.k, F::disjunction(a.phi, a.psi)),
                        F::disjunction(F::box(a.k, a.phi), F::box(a.k, a.psi)));
  }
  return F::bottom();
}

/// Side condition of the instance, using minimal scopes with
/// min(empty) = +inf and max(empty) = -inf.
inline bool side_condition_holds(const AxiomInstance& a) {
  switch (a.schema) {
    case Schema::Distributivity:
    case Schema::Reflexivity:
      return true;
    case Schema::SelfAwareness:
      return member_phi(a.phi, {a.k});
    case Schema::Gateway: {
      Scope s = scope(a.phi);
      return (a.k < a.n && s.min() >= a.n) || (s.max() <= a.n && a.n < a.k);
    }
    case Schema::Disjunction:
      return scope(a.phi).max() <= a.k && scope(a.psi).min() >= a.k;
  }
  return false;
}

/// True iff line_formula is exactly the instance and its side condition holds.
inline bool match_axiom(const AxiomInstance& a, const Formula& line_formula) {
  return instantiate(a) == line_formula && side_condition_holds(a);
}

inline bool match_axiom(std::string_view schema, AxiomInstance a, const Formula& line_formula) {
  a.schema = schema_from_name(schema);
  return match_axiom(a, line_formula);
}

// ---------------------------------------------------------------------------
// Scripts

struct Tautology {
  friend bool operator==(const Tautology&, const Tautology&) = default;
};
struct ModusPonens {
  std::size_t from = 0;  // line holding phi
  std::size_t impl = 0;  // line holding phi -> this
  friend bool operator==(const ModusPonens&, const ModusPonens&) = default;
};
struct Necessitation {
  Channel k = 0;
  std::size_t from = 0;
  friend bool operator==(const Necessitation&, const Necessitation&) = default;
};
struct Premise {
  friend bool operator==(const Premise&, const Premise&) = default;
};

using Justification = std::variant<Tautology, AxiomInstance, ModusPonens, Necessitation, Premise>;

struct ProofLine {
  std::size_t id = 0;
  Formula formula;
  Justification rule;
  friend bool operator==(const ProofLine&, const ProofLine&) = default;
};

struct ProofScript {
  Formula goal;
  bool premises_allowed = false;
  std::vector<ProofLine> lines;
  friend bool operator==(const ProofScript&, const ProofScript&) = default;
};

struct LineDiagnostic {
  enum class Status { Ok, Failed, Skipped };
  std::size_t id = 0;
  Status status = Status::Skipped;
  bool tainted = false;  // depends on a premise
  std::string message;
};

struct Verdict {
  bool accepted = false;
  std::optional<std::size_t> failing_line;  // id of the first failing line
  std::string reason;
  std::vector<LineDiagnostic> lines;
};

struct CheckOptions {
  std::size_t variable_limit = kDefaultVariableLimit;
};

namespace detail {

struct LineState {
  const ProofLine* line;
  bool tainted;
};

inline std::string describe_ref(std::size_t ref) { return "line " + std::to_string(ref); }

}  // namespace detail

/// Checks every line of a script. Later lines are still examined after a
/// failure (so diagnostics are complete) but the verdict names the first.
inline Verdict check_script(const ProofScript& s, const CheckOptions& options = {}) {
  Verdict v;
  std::map<std::size_t, detail::LineState> seen;
  std::optional<std::size_t> previous_id;

  auto fail = [&](LineDiagnostic& d, std::string message) {
    d.status = LineDiagnostic::Status::Failed;
    d.message = std::move(message);
    if (!v.failing_line) {
      v.failing_line = d.id;
      v.reason = d.message;
    }
  };

  auto lookup = [&](std::size_t ref, std::size_t self) -> const detail::LineState* {
    if (ref >= self) return nullptr;
    auto it = seen.find(ref);
    return it == seen.end() ? nullptr : &it->second;
  };

  for (const ProofLine& line : s.lines) {
    LineDiagnostic d;
    d.id = line.id;
    d.status = LineDiagnostic::Status::Ok;

    if (line.id == 0 || (previous_id && line.id <= *previous_id)) {
      fail(d, "line ids must be positive and strictly increasing");
      v.lines.push_back(std::move(d));
      continue;
    }
    previous_id = line.id;

    bool ok = true;
    bool tainted = false;
    std::visit(
        [&](const auto& rule) {
          using R = std::decay_t<decltype(rule)>;
          if constexpr (std::is_same_v<R, Tautology>) {
            try {
              if (!is_tautology(line.formula, options.variable_limit)) {
                ok = false;
                fail(d, "not a propositional tautology");
              }
            } catch (const VariableLimitError& e) {
              ok = false;
              fail(d, e.what());
            }
          } else if constexpr (std::is_same_v<R, AxiomInstance>) {
            if (instantiate(rule) != line.formula) {
              ok = false;
              fail(d, std::string("formula is not the ") + std::string(schema_name(rule.schema)) +
                          " instance " + render(instantiate(rule)));
            } else if (!side_condition_holds(rule)) {
              ok = false;
              fail(d, std::string(schema_name(rule.schema)) + " side condition fails");
            }
          } else if constexpr (std::is_same_v<R, ModusPonens>) {
            const auto* from = lookup(rule.from, line.id);
            const auto* impl = lookup(rule.impl, line.id);
            if (!from || !impl) {
              ok = false;
              fail(d, "modus ponens cites " + detail::describe_ref(!from ? rule.from : rule.impl) +
                          ", which is not an earlier line");
            } else if (impl->line->formula != Formula::implies(from->line->formula, line.formula)) {
              ok = false;
              fail(d, "line " + std::to_string(rule.impl) + " is not (line " + std::to_string(rule.from) +
                          " -> this formula)");
            } else {
              tainted = from->tainted || impl->tainted;
            }
          } else if constexpr (std::is_same_v<R, Necessitation>) {
            const auto* from = lookup(rule.from, line.id);
            if (!from) {
              ok = false;
              fail(d, "necessitation cites " + detail::describe_ref(rule.from) + ", which is not an earlier line");
            } else if (from->tainted) {
              ok = false;
              fail(d, "necessitation applied to line " + std::to_string(rule.from) + ", which depends on a premise");
            } else if (line.formula != Formula::box(rule.k, from->line->formula)) {
              ok = false;
              fail(d, "formula is not [" + std::to_string(rule.k) + "] applied to line " + std::to_string(rule.from));
            }
          } else if constexpr (std::is_same_v<R, Premise>) {
            tainted = true;
            if (!s.premises_allowed) {
              ok = false;
              fail(d, "premises are not allowed in this script");
            }
          }
        },
        line.rule);

    d.tainted = tainted;
    // Failed lines are not citable; later references to them fail too.
    if (ok) seen.emplace(line.id, detail::LineState{&line, tainted});
    v.lines.push_back(std::move(d));
  }

  if (s.lines.empty()) {
    v.failing_line = std::nullopt;
    v.reason = "script has no lines";
    v.accepted = false;
    return v;
  }
  if (!v.failing_line && s.lines.back().formula != s.goal) {
    v.failing_line = s.lines.back().id;
    v.reason = "last line does not match the goal";
    v.lines.back().status = LineDiagnostic::Status::Failed;
    v.lines.back().message = v.reason;
  }
  v.accepted = !v.failing_line.has_value();
  return v;
}

}  // namespace chainlogic
