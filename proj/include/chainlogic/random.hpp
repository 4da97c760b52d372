#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "chainlogic/formula.hpp"

namespace chainlogic {

/// Platform-independent random source: the 64-bit Mersenne Twister output is
/// fixed by the standard, and reduction is done here rather than through the
/// (implementation-defined) standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  /// Uniform in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }
  bool chance(std::uint64_t numerator, std::uint64_t denominator) { return below(denominator) < numerator; }

 private:
  std::mt19937_64 engine_;
};

struct ChannelRange {
  Channel lo = 0;
  Channel hi = 0;
  bool empty() const { return hi < lo; }
};

struct FormulaGenOptions {
  /// Channels usable anywhere (inside boxes).
  ChannelRange channels{0, 2};
  std::vector<std::string> atom_names{"p"};
  std::size_t max_depth = 4;
  /// Use derived connectives (negation, diamond, conjunction, disjunction),
  /// which expand to core nodes.
  bool sugar = true;
};

namespace detail {

inline Formula random_leaf(Rng& rng, const FormulaGenOptions& o, const ChannelRange& outer) {
  if (outer.empty() || o.atom_names.empty() || rng.chance(1, 8)) return Formula::bottom();
  const auto& name = o.atom_names[rng.below(o.atom_names.size())];
  return Formula::atom(rng.between(outer.lo, outer.hi), name);
}

inline Formula random_formula_impl(Rng& rng, const FormulaGenOptions& o, std::size_t depth, const ChannelRange& outer) {
  if (depth == 0 || rng.chance(1, 5)) return random_leaf(rng, o, outer);
  const std::uint64_t choices = o.sugar ? 7 : 3;
  switch (rng.below(choices)) {
    case 0:
    case 1: {
      Formula a = random_formula_impl(rng, o, depth - 1, outer);
      return Formula::implies(std::move(a), random_formula_impl(rng, o, depth - 1, outer));
    }
    case 2:
      if (outer.empty()) return Formula::bottom();
      {
        Channel k = rng.between(outer.lo, outer.hi);
        return Formula::box(k, random_formula_impl(rng, o, depth - 1, o.channels));
      }
    case 3:
      return Formula::negation(random_formula_impl(rng, o, depth - 1, outer));
    case 4: {
      Formula a = random_formula_impl(rng, o, depth - 1, outer);
      return Formula::conjunction(std::move(a), random_formula_impl(rng, o, depth - 1, outer));
    }
    case 5: {
      Formula a = random_formula_impl(rng, o, depth - 1, outer);
      return Formula::disjunction(std::move(a), random_formula_impl(rng, o, depth - 1, outer));
    }
    default:
      if (outer.empty()) return Formula::bottom();
      {
        Channel k = rng.between(outer.lo, outer.hi);
        return Formula::diamond(k, random_formula_impl(rng, o, depth - 1, o.channels));
      }
  }
}

}  // namespace detail

/// Random formula whose outermost atoms and boxes use channels from `outer`
/// (so its scope lies in that range); channels under boxes are unrestricted.
inline Formula random_formula(Rng& rng, const FormulaGenOptions& o, const ChannelRange& outer) {
  return detail::random_formula_impl(rng, o, o.max_depth, outer);
}

inline Formula random_formula(Rng& rng, const FormulaGenOptions& o) { return random_formula(rng, o, o.channels); }

}  // namespace chainlogic
