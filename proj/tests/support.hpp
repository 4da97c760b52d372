#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond the protocol accessors: runs come from a plain
// product-and-filter loop and formulas are evaluated straight from the
// definition without caching.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <string>
#include <vector>

#include "chainlogic/formula.hpp"
#include "chainlogic/protocol.hpp"
#include "chainlogic/search.hpp"

namespace oracle {

using namespace chainlogic;

/// Every assignment in the product of the value sets, kept if each adjacent
/// pair is allowed. Lexicographic by value index.
inline std::vector<Run> product_filter_runs(const ChainProtocol& p) {
  std::vector<Run> out;
  const std::size_t w = p.width();
  std::vector<ValueIndex> digits(w, 0);
  while (true) {
    bool ok = true;
    for (std::size_t i = 1; i < w && ok; ++i)
      ok = p.local(p.lo() + static_cast<Channel>(i)).allows(digits[i - 1], digits[i]);
    if (ok) out.emplace_back(p.lo(), digits);
    std::size_t i = w;
    while (i > 0) {
      --i;
      if (++digits[i] < p.values(p.lo() + static_cast<Channel>(i)).size()) break;
      digits[i] = 0;
      if (i == 0) return out;
    }
  }
}

/// Truth at run r, straight from the definition. Boxes over channels outside
/// the window range over every run.
inline bool naive_eval(const ChainProtocol& p, const std::vector<Run>& all, const Run& r, const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Bottom:
      return false;
    case Formula::Kind::Atom:
      return p.atoms(f.channel()).truth(f.name(), r.at(f.channel())).value();
    case Formula::Kind::Implies:
      return !naive_eval(p, all, r, f.lhs()) || naive_eval(p, all, r, f.rhs());
    case Formula::Kind::Box:
      for (const Run& s : all) {
        if (p.in_window(f.channel()) && s.at(f.channel()) != r.at(f.channel())) continue;
        if (!naive_eval(p, all, s, f.body())) return false;
      }
      return true;
  }
  return false;
}

/// Builds a protocol from labels: values[k - lo], pairs[k - lo - 1] and
/// atom truth sets per channel.
inline ChainProtocol make_protocol(Channel lo, const std::vector<std::vector<std::string>>& values,
                                   const std::vector<std::vector<std::pair<std::string, std::string>>>& pairs,
                                   const std::vector<std::map<std::string, std::vector<std::string>>>& atoms = {}) {
  ProtocolDescription d;
  d.lo = lo;
  d.hi = lo + static_cast<Channel>(values.size()) - 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ProtocolDescription::ChannelEntry e;
    e.index = lo + static_cast<Channel>(i);
    e.values = values[i];
    if (i < atoms.size()) e.atoms = atoms[i];
    d.channels.push_back(e);
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) d.local.push_back({lo + static_cast<Channel>(i) + 1, pairs[i]});
  return build_protocol(d);
}

inline std::vector<std::pair<std::string, std::string>> full_pairs(const std::vector<std::string>& a,
                                                                   const std::vector<std::string>& b) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& u : a)
    for (const auto& v : b) out.emplace_back(u, v);
  return out;
}

inline int hamming(const std::string& a, const std::string& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

/// Number of protocols with at least one run over `channels` channels with
/// 1..max_values values each and no atoms, by generating every relation
/// tuple and checking runs with the product filter.
inline std::uint64_t brute_force_protocol_count(std::size_t channels, std::size_t max_values) {
  std::uint64_t count = 0;
  std::vector<std::size_t> sizes(channels, 1);
  while (true) {
    std::vector<std::uint64_t> limits;
    for (std::size_t k = 1; k < channels; ++k) limits.push_back(std::uint64_t{1} << (sizes[k - 1] * sizes[k]));
    std::vector<std::uint64_t> rel(channels - 1, 0);
    while (true) {
      ProtocolCandidate c{sizes, rel, std::vector<std::uint64_t>(channels, 0)};
      if (!product_filter_runs(to_protocol(c, 0)).empty()) ++count;
      std::size_t i = rel.size();
      bool carry = true;
      while (carry && i > 0) {
        --i;
        if (++rel[i] < limits[i]) carry = false;
        else rel[i] = 0;
      }
      if (carry) break;
    }
    std::size_t i = channels;
    bool carry = true;
    while (carry && i > 0) {
      --i;
      if (++sizes[i] <= max_values) carry = false;
      else sizes[i] = 1;
    }
    if (carry) break;
  }
  return count;
}

/// Maximal atom and box subformulas, each once, in first-occurrence order.
inline std::vector<Formula> propositional_letters(const Formula& f) {
  std::vector<Formula> out;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (g.is_implies()) {
      walk(g.lhs());
      walk(g.rhs());
    } else if (!g.is_bottom() && std::find(out.begin(), out.end(), g) == out.end()) {
      out.push_back(g);
    }
  };
  walk(f);
  return out;
}

inline bool prop_eval(const Formula& f, const std::unordered_map<Formula, bool, FormulaHash>& assignment) {
  switch (f.kind()) {
    case Formula::Kind::Bottom:
      return false;
    case Formula::Kind::Implies:
      return !prop_eval(f.lhs(), assignment) || prop_eval(f.rhs(), assignment);
    default:
      return assignment.at(f);
  }
}

/// Propositional equivalence by a full truth table over the letters of both.
inline bool equivalent_by_table(const Formula& a, const Formula& b) {
  std::vector<Formula> vars = propositional_letters(Formula::implies(a, b));
  if (vars.size() > 20) throw std::runtime_error("too many letters for the reference table");
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << vars.size()); ++m) {
    std::unordered_map<Formula, bool, FormulaHash> assignment;
    for (std::size_t i = 0; i < vars.size(); ++i) assignment[vars[i]] = (m >> i) & 1U;
    if (prop_eval(a, assignment) != prop_eval(b, assignment)) return false;
  }
  return true;
}

}  // namespace oracle
