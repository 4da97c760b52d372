#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <exception>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "chainlogic/formula.hpp"
#include "chainlogic/proofcheck.hpp"
#include "chainlogic/protocol.hpp"
#include "chainlogic/random.hpp"
#include "chainlogic/semantics.hpp"

namespace chainlogic {

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxSearchValues = 7;  // relation masks stay below 64 bits
inline constexpr std::uint64_t kDefaultCeiling = 1'000'000;

struct Exhaustive {};
struct RandomSampling {
  std::uint64_t seed = 0;
  std::size_t samples = 1;
};

struct SearchBounds {
  std::size_t num_channels = 3;
  std::size_t max_values = 2;
  std::size_t atoms_per_channel = 1;
  std::variant<Exhaustive, RandomSampling> mode = Exhaustive{};
  /// Largest candidate space exhaustive mode will walk.
  std::uint64_t ceiling = kDefaultCeiling;
  /// First channel of the generated window.
  Channel origin = 0;
};

/// Atom names used by generated protocols: p, q, r, s, t, u, then a0, a1, ...
inline std::string generated_atom_name(std::size_t i) {
  static const char* const kNames[] = {"p", "q", "r", "s", "t", "u"};
  if (i < 6) return kNames[i];
  return "a" + std::to_string(i - 6);
}

inline std::string generated_value_label(std::size_t i) { return "v" + std::to_string(i); }

/// Compact encoding of a generated protocol. Relation bit u * |V_k| + v of
/// relations[k-1] means (u, v) is in L_k; truth bit a * |V_k| + v of
/// truth[k] means atom a holds at value v.
struct ProtocolCandidate {
  std::vector<std::size_t> sizes;
  std::vector<std::uint64_t> relations;
  std::vector<std::uint64_t> truth;

  friend bool operator==(const ProtocolCandidate&, const ProtocolCandidate&) = default;
};

inline ChainProtocol to_protocol(const ProtocolCandidate& c, std::size_t atoms_per_channel, Channel origin = 0) {
  std::vector<ChainProtocol::ChannelData> channels;
  for (std::size_t k = 0; k < c.sizes.size(); ++k) {
    std::vector<std::string> labels;
    for (std::size_t v = 0; v < c.sizes[k]; ++v) labels.push_back(generated_value_label(v));
    auto domain = std::make_shared<const ExplicitDomain>(std::move(labels));
    std::map<std::string, std::vector<bool>, std::less<>> truth;
    for (std::size_t a = 0; a < atoms_per_channel; ++a) {
      std::vector<bool> row(c.sizes[k]);
      for (std::size_t v = 0; v < c.sizes[k]; ++v) row[v] = (c.truth[k] >> (a * c.sizes[k] + v)) & 1U;
      truth.emplace(generated_atom_name(a), std::move(row));
    }
    channels.push_back({domain, std::make_shared<const ExplicitAtoms>(std::move(truth))});
  }
  std::vector<std::shared_ptr<const LocalCondition>> local;
  for (std::size_t k = 1; k < c.sizes.size(); ++k) {
    std::vector<std::pair<ValueIndex, ValueIndex>> pairs;
    const std::size_t prev = c.sizes[k - 1], next = c.sizes[k];
    for (std::size_t u = 0; u < prev; ++u)
      for (std::size_t v = 0; v < next; ++v)
        if ((c.relations[k - 1] >> (u * next + v)) & 1U)
          pairs.emplace_back(static_cast<ValueIndex>(u), static_cast<ValueIndex>(v));
    local.push_back(std::make_shared<const PairRelation>(prev, next, pairs));
  }
  return ChainProtocol(origin, std::move(channels), std::move(local));
}

namespace detail {

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  return __builtin_mul_overflow(a, b, &r) ? std::numeric_limits<std::uint64_t>::max() : r;
}

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  return __builtin_add_overflow(a, b, &r) ? std::numeric_limits<std::uint64_t>::max() : r;
}

inline std::uint64_t pow2(std::size_t bits) {
  return bits >= 64 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << bits);
}

inline void check_bounds(const SearchBounds& b) {
  if (b.num_channels == 0) throw SearchError("at least one channel is required");
  if (b.max_values == 0) throw SearchError("at least one value per channel is required");
  if (b.max_values > kMaxSearchValues)
    throw SearchError("at most " + std::to_string(kMaxSearchValues) + " values per channel are supported");
  if (b.atoms_per_channel * b.max_values > 63) throw SearchError("too many atoms per channel");
  if (auto* r = std::get_if<RandomSampling>(&b.mode); r && r->samples == 0)
    throw SearchError("random mode needs at least one sample");
}

/// Advances a little-endian-significance odometer (last digit fastest).
inline bool advance(std::vector<std::uint64_t>& digits, const std::vector<std::uint64_t>& lo,
                    const std::vector<std::uint64_t>& hi) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (digits[i] < hi[i]) {
      ++digits[i];
      return true;
    }
    digits[i] = lo[i];
  }
  return false;
}

}  // namespace detail

/// Size of the exhaustive candidate space (saturating).
inline std::uint64_t candidate_space(const SearchBounds& b) {
  detail::check_bounds(b);
  std::uint64_t total = 0;
  std::vector<std::uint64_t> sizes(b.num_channels, 1);
  const std::vector<std::uint64_t> lo(b.num_channels, 1), hi(b.num_channels, b.max_values);
  do {
    std::uint64_t n = 1;
    std::size_t value_total = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      value_total += sizes[k];
      if (k > 0) n = detail::saturating_mul(n, detail::pow2(sizes[k - 1] * sizes[k]) - 1);
    }
    n = detail::saturating_mul(n, detail::pow2(value_total * b.atoms_per_channel));
    total = detail::saturating_add(total, n);
  } while (detail::advance(sizes, lo, hi));
  return total;
}

/// Stream of generated protocols with at least one run, in canonical order
/// (exhaustive) or drawn from the seed (random).
class ProtocolEnumerator {
 public:
  explicit ProtocolEnumerator(SearchBounds bounds) : b_(std::move(bounds)) {
    detail::check_bounds(b_);
    if (std::holds_alternative<Exhaustive>(b_.mode)) {
      const std::uint64_t space = candidate_space(b_);
      if (space > b_.ceiling)
        throw SearchError("candidate space of " + std::to_string(space) + " exceeds the ceiling of " +
                          std::to_string(b_.ceiling));
    } else {
      rng_.emplace(std::get<RandomSampling>(b_.mode).seed);
    }
  }

  const SearchBounds& bounds() const noexcept { return b_; }

  /// Number of protocols produced so far.
  std::uint64_t produced() const noexcept { return produced_; }

  std::optional<ChainProtocol> next() {
    auto c = next_candidate();
    if (!c) return std::nullopt;
    return to_protocol(*c, b_.atoms_per_channel, b_.origin);
  }

  std::optional<ProtocolCandidate> next_candidate() {
    std::optional<ProtocolCandidate> c = rng_ ? next_random() : next_exhaustive();
    if (c) ++produced_;
    return c;
  }

 private:
  std::optional<ProtocolCandidate> next_exhaustive() {
    if (done_) return std::nullopt;
    if (!started_) {
      started_ = true;
      sizes_.assign(b_.num_channels, 1);
      if (!seek_relations(true)) return finish();
      return current();
    }
    if (detail::advance(truth_, truth_lo_, truth_hi_)) return current();
    if (seek_relations(false)) return current();
    return finish();
  }

  std::optional<ProtocolCandidate> finish() {
    done_ = true;
    return std::nullopt;
  }

  // Moves to the next relation tuple (moving on to the next size tuple when
  // needed) that admits at least one run, and resets the truth tables.
  bool seek_relations(bool fresh) {
    const std::size_t n = b_.num_channels;
    const std::vector<std::uint64_t> size_lo(n, 1), size_hi(n, b_.max_values);
    while (true) {
      if (fresh) {
        relation_lo_.assign(n - 1, 1);
        relation_hi_.assign(n - 1, 0);
        for (std::size_t k = 1; k < n; ++k) relation_hi_[k - 1] = detail::pow2(sizes_[k - 1] * sizes_[k]) - 1;
        relations_ = relation_lo_;
        fresh = false;
      } else if (!detail::advance(relations_, relation_lo_, relation_hi_)) {
        if (!detail::advance(sizes_, size_lo, size_hi)) return false;
        fresh = true;
        continue;
      }
      if (has_runs()) {
        reset_truth();
        return true;
      }
    }
  }

  void reset_truth() {
    const std::size_t n = b_.num_channels;
    truth_lo_.assign(n, 0);
    truth_hi_.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) truth_hi_[k] = detail::pow2(sizes_[k] * b_.atoms_per_channel) - 1;
    truth_ = truth_lo_;
  }

  bool has_runs() const {
    ProtocolCandidate c{sizes_vec(), relations_, std::vector<std::uint64_t>(b_.num_channels, 0)};
    return run_count(to_protocol(c, 0)) > 0;
  }

  std::vector<std::size_t> sizes_vec() const { return {sizes_.begin(), sizes_.end()}; }

  ProtocolCandidate current() const { return ProtocolCandidate{sizes_vec(), relations_, truth_}; }

  std::optional<ProtocolCandidate> next_random() {
    const auto& mode = std::get<RandomSampling>(b_.mode);
    if (produced_ >= mode.samples) return std::nullopt;
    return random_candidate(*rng_, b_);
  }

 public:
  /// One random protocol candidate with at least one run.
  static ProtocolCandidate random_candidate(Rng& rng, const SearchBounds& b) {
    const std::size_t n = b.num_channels;
    while (true) {
      ProtocolCandidate c;
      for (std::size_t k = 0; k < n; ++k) c.sizes.push_back(static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(b.max_values))));
      for (std::size_t k = 1; k < n; ++k) {
        const std::uint64_t bits = c.sizes[k - 1] * c.sizes[k];
        c.relations.push_back(1 + rng.below(detail::pow2(bits) - 1));
      }
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t bits = c.sizes[k] * b.atoms_per_channel;
        c.truth.push_back(bits == 0 ? 0 : rng.below(detail::pow2(bits)));
      }
      if (run_count(to_protocol(c, 0)) > 0) return c;
    }
  }

 private:
  SearchBounds b_;
  std::optional<Rng> rng_;
  std::uint64_t produced_ = 0;
  bool started_ = false;
  bool done_ = false;
  std::vector<std::uint64_t> sizes_;
  std::vector<std::uint64_t> relations_, relation_lo_, relation_hi_;
  std::vector<std::uint64_t> truth_, truth_lo_, truth_hi_;
};

inline std::vector<ChainProtocol> enumerate_protocols(const SearchBounds& b, std::size_t limit = SIZE_MAX) {
  ProtocolEnumerator e(b);
  std::vector<ChainProtocol> out;
  while (out.size() < limit) {
    auto p = e.next();
    if (!p) break;
    out.push_back(std::move(*p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Countermodel search

struct Countermodel {
  ChainProtocol protocol;
  Run run;
  /// Position of the protocol in the scan (0-based).
  std::uint64_t protocol_index = 0;
};

struct FalsifyResult {
  std::optional<Countermodel> witness;
  std::uint64_t protocols_scanned = 0;
  bool exhausted = false;  // the whole bounded space was scanned
};

struct FalsifyOptions {
  std::size_t threads = 1;
  std::size_t batch = 256;
};

namespace detail {

/// Evaluates items [0, n) with up to `threads` workers and returns the
/// smallest index whose result is set, together with that result.
template <typename Result, typename Fn>
std::optional<std::pair<std::size_t, Result>> first_hit(std::size_t n, std::size_t threads, Fn&& fn) {
  std::vector<std::optional<Result>> results(n);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      results[i] = fn(i);
      if (results[i]) return std::make_pair(i, std::move(*results[i]));
    }
    return std::nullopt;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> best{n};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= n || i > best.load()) return;
        try {
          results[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
        if (results[i]) {
          std::size_t cur = best.load();
          while (i < cur && !best.compare_exchange_weak(cur, i)) {
          }
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  // Every index below `best` was evaluated, so `best` is the first hit.
  std::size_t i = best.load();
  if (i >= n) return std::nullopt;
  return std::make_pair(i, std::move(*results[i]));
}

inline void check_atoms_generated(const Formula& f, std::size_t atoms_per_channel) {
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (g.is_atom()) {
      bool ok = false;
      for (std::size_t a = 0; a < atoms_per_channel; ++a) ok = ok || g.name() == generated_atom_name(a);
      if (!ok)
        throw SearchError("atom '" + g.name() + "' is not generated with " + std::to_string(atoms_per_channel) +
                          " atom(s) per channel");
    } else if (g.is_box()) {
      stack.push_back(g.body());
    } else if (g.is_implies()) {
      stack.push_back(g.lhs());
      stack.push_back(g.rhs());
    }
  }
}

}  // namespace detail

/// Places the bounds' window so that it starts at the least channel of f;
/// throws if f spans more channels than the window holds.
inline SearchBounds embed_window(const Formula& f, SearchBounds b) {
  std::set<Channel> chans = channels(f);
  b.origin = chans.empty() ? 0 : *chans.begin();
  if (!chans.empty() && static_cast<std::uint64_t>(*chans.rbegin() - *chans.begin()) >= b.num_channels)
    throw SearchError("formula channels span [" + std::to_string(*chans.begin()) + ", " +
                      std::to_string(*chans.rbegin()) + "], which does not fit in " + std::to_string(b.num_channels) +
                      " channel(s)");
  return b;
}

/// First (protocol, run) in scan order at which f is false, looking at no
/// more than `budget` protocols. Absence only means no countermodel exists
/// within the bounds and budget.
inline FalsifyResult falsify(const Formula& f, const SearchBounds& bounds, std::uint64_t budget,
                             const FalsifyOptions& options = {}) {
  SearchBounds b = embed_window(f, bounds);
  detail::check_atoms_generated(f, b.atoms_per_channel);
  ProtocolEnumerator e(b);
  FalsifyResult result;
  const std::size_t batch = std::max<std::size_t>(1, options.batch);
  while (result.protocols_scanned < budget) {
    std::vector<ChainProtocol> chunk;
    while (chunk.size() < batch && result.protocols_scanned + chunk.size() < budget) {
      auto p = e.next();
      if (!p) break;
      chunk.push_back(std::move(*p));
    }
    if (chunk.empty()) {
      result.exhausted = true;
      break;
    }
    auto hit = detail::first_hit<Run>(chunk.size(), options.threads, [&](std::size_t i) {
      EvalContext ctx(chunk[i]);
      return counterexample(ctx, f);
    });
    if (hit) {
      result.protocols_scanned += hit->first + 1;
      result.witness = Countermodel{chunk[hit->first], std::move(hit->second), result.protocols_scanned - 1};
      return result;
    }
    result.protocols_scanned += chunk.size();
  }
  if (!result.exhausted && result.protocols_scanned >= budget) {
    // Budget reached exactly at the end of the space counts as exhausted.
    result.exhausted = !e.next().has_value();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Soundness sweeps

struct SweepWitness {
  ChainProtocol protocol;
  Run run;
  AxiomInstance instance;
  Formula formula;
};

struct SweepReport {
  Schema schema = Schema::Reflexivity;
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t side_condition_failures = 0;  // only counted when not enforced
  std::optional<SweepWitness> first_violation;
};

struct SweepOptions {
  bool enforce_side_conditions = true;
  std::size_t formula_depth = 3;
  std::uint64_t seed = 0;
};

/// Random schema instance over channels of the window [lo, hi] and atoms of
/// the generated protocols; when `satisfy` is set the side condition holds by
/// construction.
inline AxiomInstance random_instance(Rng& rng, Schema schema, Channel lo, Channel hi,
                                     const std::vector<std::string>& atoms, std::size_t depth, bool satisfy) {
  FormulaGenOptions o;
  o.channels = {lo, hi};
  o.atom_names = atoms;
  o.max_depth = depth;
  AxiomInstance a;
  a.schema = schema;
  a.k = rng.between(lo, hi);
  const ChannelRange all{lo, hi};
  switch (schema) {
    case Schema::Distributivity:
      a.phi = random_formula(rng, o, all);
      a.psi = random_formula(rng, o, all);
      break;
    case Schema::Reflexivity:
      a.phi = random_formula(rng, o, all);
      break;
    case Schema::SelfAwareness:
      a.phi = random_formula(rng, o, satisfy ? ChannelRange{a.k, a.k} : all);
      break;
    case Schema::Gateway: {
      if (hi == lo) throw SearchError("gateway instances need at least two channels");
      do {
        a.n = rng.between(lo, hi);
      } while (a.n == a.k);
      ChannelRange outer = all;
      if (satisfy) outer = a.k < a.n ? ChannelRange{a.n, hi} : ChannelRange{lo, a.n};
      a.phi = random_formula(rng, o, outer);
      break;
    }
    case Schema::Disjunction:
      a.phi = random_formula(rng, o, satisfy ? ChannelRange{lo, a.k} : all);
      a.psi = random_formula(rng, o, satisfy ? ChannelRange{a.k, hi} : all);
      break;
  }
  return a;
}

/// Samples `trials` schema instances on random protocols within the bounds
/// and checks each at every run. Under enforced side conditions a sound
/// schema yields zero violations.
inline SweepReport soundness_sweep(Schema schema, const SearchBounds& bounds, std::size_t trials,
                                   const SweepOptions& options = {}) {
  detail::check_bounds(bounds);
  SweepReport report;
  report.schema = schema;
  std::uint64_t seed = options.seed;
  if (auto* r = std::get_if<RandomSampling>(&bounds.mode)) seed = r->seed;
  Rng rng(seed);
  std::vector<std::string> atoms;
  for (std::size_t a = 0; a < bounds.atoms_per_channel; ++a) atoms.push_back(generated_atom_name(a));
  const Channel lo = bounds.origin;
  const Channel hi = bounds.origin + static_cast<Channel>(bounds.num_channels) - 1;

  for (std::size_t t = 0; t < trials; ++t) {
    ProtocolCandidate c = ProtocolEnumerator::random_candidate(rng, bounds);
    ChainProtocol p = to_protocol(c, bounds.atoms_per_channel, bounds.origin);
    AxiomInstance inst =
        random_instance(rng, schema, lo, hi, atoms, options.formula_depth, options.enforce_side_conditions);
    if (!side_condition_holds(inst)) {
      if (options.enforce_side_conditions) throw std::logic_error("generated instance violates its side condition");
      ++report.side_condition_failures;
    }
    Formula f = instantiate(inst);
    EvalContext ctx(p);
    ++report.trials;
    if (auto r = counterexample(ctx, f)) {
      ++report.violations;
      if (!report.first_violation) report.first_violation = SweepWitness{p, *r, inst, f};
    }
  }
  return report;
}

inline SweepReport soundness_sweep(std::string_view schema, const SearchBounds& bounds, std::size_t trials,
                                   const SweepOptions& options = {}) {
  return soundness_sweep(schema_from_name(schema), bounds, trials, options);
}

}  // namespace chainlogic
