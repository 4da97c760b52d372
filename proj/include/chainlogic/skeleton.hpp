#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "chainlogic/formula.hpp"

namespace chainlogic {

inline constexpr std::size_t kDefaultVariableLimit = 24;

class VariableLimitError : public std::runtime_error {
 public:
  VariableLimitError(std::size_t count, std::size_t limit)
      : std::runtime_error("propositional skeleton has " + std::to_string(count) + " variables; limit is " +
                           std::to_string(limit)),
        count_(count),
        limit_(limit) {}
  std::size_t count() const noexcept { return count_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t count_;
  std::size_t limit_;
};

/// Propositional view of a formula: every maximal atom or box subformula is
/// replaced by a variable. Identical subformulas share one variable, and
/// variables are numbered in order of first occurrence (left to right).
class Skeleton {
 public:
  struct Node {
    enum class Op : std::uint8_t { False, Var, Implies };
    Op op;
    std::uint32_t a = 0;  // variable index, or lhs node index
    std::uint32_t b = 0;  // rhs node index
  };

  explicit Skeleton(const Formula& f) {
    std::unordered_map<Formula, std::uint32_t, FormulaHash> ids;
    build(f, ids);
  }

  std::size_t variable_count() const noexcept { return bindings_.size(); }
  /// bindings()[i] is the subformula abstracted by variable i.
  const std::vector<Formula>& bindings() const noexcept { return bindings_; }
  /// Template in post-order; the root is the last node.
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  /// Puts the bound subformulas back into the template.
  Formula substitute() const { return substitute_with(bindings_); }

  Formula substitute_with(const std::vector<Formula>& values) const {
    std::vector<Formula> built;
    built.reserve(nodes_.size());
    for (const Node& n : nodes_) {
      switch (n.op) {
        case Node::Op::False:
          built.push_back(Formula::bottom());
          break;
        case Node::Op::Var:
          built.push_back(values.at(n.a));
          break;
        case Node::Op::Implies:
          built.push_back(Formula::implies(built[n.a], built[n.b]));
          break;
      }
    }
    return built.back();
  }

  /// Template text with variables written X0, X1, ...
  std::string template_text() const {
    std::vector<std::string> built;
    built.reserve(nodes_.size());
    for (const Node& n : nodes_) {
      switch (n.op) {
        case Node::Op::False:
          built.push_back("false");
          break;
        case Node::Op::Var:
          built.push_back("X" + std::to_string(n.a));
          break;
        case Node::Op::Implies:
          built.push_back("(" + built[n.a] + " -> " + built[n.b] + ")");
          break;
      }
    }
    return built.back();
  }

  /// Evaluates the template on 64 assignments at once; bit j of var_bits[i]
  /// is the value of variable i in assignment j.
  std::uint64_t evaluate64(const std::vector<std::uint64_t>& var_bits, std::vector<std::uint64_t>& scratch) const {
    scratch.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      switch (n.op) {
        case Node::Op::False:
          scratch[i] = 0;
          break;
        case Node::Op::Var:
          scratch[i] = var_bits[n.a];
          break;
        case Node::Op::Implies:
          scratch[i] = ~scratch[n.a] | scratch[n.b];
          break;
      }
    }
    return scratch.back();
  }

  /// Value of the template under a single assignment (bit i = variable i).
  bool evaluate(std::uint64_t assignment) const {
    std::vector<bool> value(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      switch (n.op) {
        case Node::Op::False:
          value[i] = false;
          break;
        case Node::Op::Var:
          value[i] = (assignment >> n.a) & 1U;
          break;
        case Node::Op::Implies:
          value[i] = !value[n.a] || value[n.b];
          break;
      }
    }
    return value.back();
  }

 private:
  std::uint32_t build(const Formula& f, std::unordered_map<Formula, std::uint32_t, FormulaHash>& ids) {
    switch (f.kind()) {
      case Formula::Kind::Bottom:
        nodes_.push_back({Node::Op::False, 0, 0});
        break;
      case Formula::Kind::Atom:
      case Formula::Kind::Box: {
        auto [it, inserted] = ids.try_emplace(f, static_cast<std::uint32_t>(bindings_.size()));
        if (inserted) bindings_.push_back(f);
        nodes_.push_back({Node::Op::Var, it->second, 0});
        break;
      }
      case Formula::Kind::Implies: {
        std::uint32_t lhs = build(f.lhs(), ids);
        std::uint32_t rhs = build(f.rhs(), ids);
        nodes_.push_back({Node::Op::Implies, lhs, rhs});
        break;
      }
    }
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  std::vector<Formula> bindings_;
};

inline Skeleton skeleton(const Formula& f) { return Skeleton(f); }

/// Exhaustive truth-table check that the skeleton template is true under
/// every assignment (bottom is false).
inline bool is_tautology(const Skeleton& sk, std::size_t variable_limit = kDefaultVariableLimit) {
  const std::size_t n = sk.variable_count();
  if (n > variable_limit) throw VariableLimitError(n, variable_limit);
  if (n > 40) throw VariableLimitError(n, 40);

  static constexpr std::uint64_t kLowPatterns[6] = {
      0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
      0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL,
  };
  const std::uint64_t valid = n >= 6 ? ~0ULL : ((1ULL << (1ULL << n)) - 1);
  const std::uint64_t blocks = n >= 6 ? (1ULL << (n - 6)) : 1;

  std::vector<std::uint64_t> bits(n);
  std::vector<std::uint64_t> scratch;
  for (std::size_t i = 0; i < n && i < 6; ++i) bits[i] = kLowPatterns[i];
  for (std::uint64_t block = 0; block < blocks; ++block) {
    for (std::size_t i = 6; i < n; ++i) bits[i] = ((block >> (i - 6)) & 1U) ? ~0ULL : 0ULL;
    if ((sk.evaluate64(bits, scratch) & valid) != valid) return false;
  }
  return true;
}

inline bool is_tautology(const Formula& f, std::size_t variable_limit = kDefaultVariableLimit) {
  return is_tautology(Skeleton(f), variable_limit);
}

/// A clause is a disjunction of literals; a CNF is a conjunction of clauses.
/// Literals are skeleton variables (atoms or boxes, so their scope has at most
/// one channel) or their negations written L -> false.
using Clause = std::vector<Formula>;
using ClauseList = std::vector<Clause>;

namespace detail {

// Literal encoding: 2 * variable + (negated ? 1 : 0). Clauses are kept sorted.
using LitClause = std::vector<std::uint32_t>;
using LitCnf = std::vector<LitClause>;

inline bool clause_is_tautological(const LitClause& c) {
  for (std::size_t i = 1; i < c.size(); ++i)
    if ((c[i] >> 1) == (c[i - 1] >> 1)) return true;
  return false;
}

inline bool clause_subsumes(const LitClause& small, const LitClause& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

/// Drops duplicate and subsumed clauses, keeping first occurrences in order.
inline LitCnf simplify_cnf(LitCnf cnf) {
  LitCnf out;
  for (LitClause& c : cnf) {
    bool redundant = false;
    for (const LitClause& kept : out) {
      if (clause_subsumes(kept, c)) {
        redundant = true;
        break;
      }
    }
    if (redundant) continue;
    out.erase(std::remove_if(out.begin(), out.end(), [&](const LitClause& kept) { return clause_subsumes(c, kept); }),
              out.end());
    out.push_back(std::move(c));
  }
  return out;
}

inline LitCnf cnf_of(const Skeleton& sk, std::uint32_t node, bool positive) {
  const Skeleton::Node& n = sk.nodes()[node];
  switch (n.op) {
    case Skeleton::Node::Op::False:
      return positive ? LitCnf{LitClause{}} : LitCnf{};
    case Skeleton::Node::Op::Var:
      return LitCnf{LitClause{2 * n.a + (positive ? 0U : 1U)}};
    case Skeleton::Node::Op::Implies:
      break;
  }
  if (!positive) {
    // not (a -> b)  ==  a and not b
    LitCnf out = cnf_of(sk, n.a, true);
    LitCnf rest = cnf_of(sk, n.b, false);
    out.insert(out.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
    return simplify_cnf(std::move(out));
  }
  // a -> b  ==  not a or b
  LitCnf left = cnf_of(sk, n.a, false);
  LitCnf right = cnf_of(sk, n.b, true);
  LitCnf out;
  for (const LitClause& l : left) {
    for (const LitClause& r : right) {
      LitClause merged;
      std::set_union(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(merged));
      merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
      if (!clause_is_tautological(merged)) out.push_back(std::move(merged));
    }
  }
  return simplify_cnf(std::move(out));
}

}  // namespace detail

/// Conjunctive normal form whose literals each mention at most one channel.
/// Clause order follows generation order; literals within a clause follow
/// variable first-occurrence order.
inline ClauseList scoped_cnf(const Formula& f, std::size_t variable_limit = kDefaultVariableLimit) {
  Skeleton sk(f);
  if (sk.variable_count() > variable_limit) throw VariableLimitError(sk.variable_count(), variable_limit);
  detail::LitCnf cnf = detail::cnf_of(sk, static_cast<std::uint32_t>(sk.nodes().size() - 1), true);
  ClauseList out;
  out.reserve(cnf.size());
  for (const detail::LitClause& c : cnf) {
    Clause clause;
    clause.reserve(c.size());
    for (std::uint32_t lit : c) {
      const Formula& var = sk.bindings()[lit >> 1];
      clause.push_back((lit & 1U) ? Formula::negation(var) : var);
    }
    out.push_back(std::move(clause));
  }
  return out;
}

/// Builds the formula for a clause list: an empty clause is false and an
/// empty list is true. Disjunction and conjunction fold to the right.
inline Formula cnf_formula(const ClauseList& clauses) {
  auto disjoin = [](const Clause& c) {
    if (c.empty()) return Formula::bottom();
    Formula acc = c.back();
    for (std::size_t i = c.size() - 1; i-- > 0;) acc = Formula::disjunction(c[i], acc);
    return acc;
  };
  if (clauses.empty()) return Formula::truth();
  Formula acc = disjoin(clauses.back());
  for (std::size_t i = clauses.size() - 1; i-- > 0;) acc = Formula::conjunction(disjoin(clauses[i]), acc);
  return acc;
}

}  // namespace chainlogic
