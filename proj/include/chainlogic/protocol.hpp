#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chainlogic/formula.hpp"

namespace chainlogic {

/// Position of a value label within its channel's (lexicographically ordered)
/// value set.
using ValueIndex = std::uint32_t;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Building blocks

/// Finite, nonempty, lexicographically ordered set of value labels.
class ValueDomain {
 public:
  virtual ~ValueDomain() = default;
  virtual std::size_t size() const = 0;
  virtual std::string label(ValueIndex i) const = 0;
  virtual std::optional<ValueIndex> index_of(std::string_view label) const = 0;
};

class ExplicitDomain final : public ValueDomain {
 public:
  /// Labels are sorted and deduplicated.
  explicit ExplicitDomain(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    if (labels_.empty()) throw ProtocolError("value set must be nonempty");
  }

  std::size_t size() const override { return labels_.size(); }
  std::string label(ValueIndex i) const override { return labels_.at(i); }
  std::optional<ValueIndex> index_of(std::string_view label) const override {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) return std::nullopt;
    return static_cast<ValueIndex>(it - labels_.begin());
  }

 private:
  std::vector<std::string> labels_;
};

/// Local condition L_k between channel k-1 and channel k. Realizations must
/// return successor and predecessor lists in ascending order.
class LocalCondition {
 public:
  virtual ~LocalCondition() = default;
  virtual bool allows(ValueIndex prev, ValueIndex next) const = 0;
  virtual std::vector<ValueIndex> successors(ValueIndex prev) const = 0;
  virtual std::vector<ValueIndex> predecessors(ValueIndex next) const = 0;
  virtual bool has_successor(ValueIndex prev) const { return !successors(prev).empty(); }
};

/// Local condition given extensionally as a set of index pairs.
class PairRelation final : public LocalCondition {
 public:
  PairRelation(std::size_t prev_size, std::size_t next_size, const std::vector<std::pair<ValueIndex, ValueIndex>>& pairs)
      : forward_(prev_size), backward_(next_size) {
    for (auto [u, v] : pairs) {
      if (u >= prev_size || v >= next_size) throw ProtocolError("local condition pair out of range");
      forward_[u].push_back(v);
      backward_[v].push_back(u);
    }
    for (auto& row : forward_) normalize(row);
    for (auto& row : backward_) normalize(row);
  }

  bool allows(ValueIndex prev, ValueIndex next) const override {
    if (prev >= forward_.size()) return false;
    const auto& row = forward_[prev];
    return std::binary_search(row.begin(), row.end(), next);
  }
  std::vector<ValueIndex> successors(ValueIndex prev) const override { return forward_.at(prev); }
  std::vector<ValueIndex> predecessors(ValueIndex next) const override { return backward_.at(next); }
  bool has_successor(ValueIndex prev) const override { return !forward_.at(prev).empty(); }

  std::size_t pair_count() const {
    std::size_t n = 0;
    for (const auto& row : forward_) n += row.size();
    return n;
  }

 private:
  static void normalize(std::vector<ValueIndex>& row) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  std::vector<std::vector<ValueIndex>> forward_;
  std::vector<std::vector<ValueIndex>> backward_;
};

/// The relation Tr restricted to one channel.
class AtomTable {
 public:
  virtual ~AtomTable() = default;
  virtual bool declared(std::string_view name) const = 0;
  /// Truth of a declared atom at a value; nullopt when the atom is undeclared.
  virtual std::optional<bool> truth(std::string_view name, ValueIndex value) const = 0;
  virtual std::vector<std::string> names() const = 0;
};

class ExplicitAtoms final : public AtomTable {
 public:
  ExplicitAtoms() = default;
  /// truth[name][v] is Tr(v, name).
  explicit ExplicitAtoms(std::map<std::string, std::vector<bool>, std::less<>> truth) : truth_(std::move(truth)) {}

  bool declared(std::string_view name) const override { return truth_.find(name) != truth_.end(); }
  std::optional<bool> truth(std::string_view name, ValueIndex value) const override {
    auto it = truth_.find(name);
    if (it == truth_.end()) return std::nullopt;
    return value < it->second.size() && it->second[value];
  }
  std::vector<std::string> names() const override {
    std::vector<std::string> out;
    for (const auto& [name, _] : truth_) out.push_back(name);
    return out;
  }

 private:
  std::map<std::string, std::vector<bool>, std::less<>> truth_;
};

// ---------------------------------------------------------------------------
// Protocols and runs

/// Per-channel assignment of values over the protocol window. Channels
/// outside the window carry the shared default value.
class Run {
 public:
  Run() = default;
  Run(Channel lo, std::vector<ValueIndex> values) : lo_(lo), values_(std::move(values)) {}

  Channel lo() const noexcept { return lo_; }
  Channel hi() const noexcept { return lo_ + static_cast<Channel>(values_.size()) - 1; }
  bool in_window(Channel k) const noexcept { return k >= lo_ && k <= hi(); }
  std::size_t width() const noexcept { return values_.size(); }

  ValueIndex at(Channel k) const {
    if (!in_window(k)) throw std::out_of_range("channel " + std::to_string(k) + " outside the run window");
    return values_[static_cast<std::size_t>(k - lo_)];
  }
  const std::vector<ValueIndex>& values() const noexcept { return values_; }

  /// Runs of the same protocol always agree outside the window.
  bool agrees_at(const Run& other, Channel k) const {
    if (!in_window(k) || !other.in_window(k)) return !in_window(k) && !other.in_window(k);
    return at(k) == other.at(k);
  }

  friend bool operator==(const Run&, const Run&) = default;
  friend auto operator<=>(const Run&, const Run&) = default;

 private:
  Channel lo_ = 0;
  std::vector<ValueIndex> values_;
};

/// Finite-window chain protocol. Channels in [lo, hi] carry value sets,
/// local conditions L_k for k in (lo, hi] and atom tables. Outside the window
/// every channel holds a single default value and every local condition is
/// trivially satisfied.
class ChainProtocol {
 public:
  struct ChannelData {
    std::shared_ptr<const ValueDomain> values;
    std::shared_ptr<const AtomTable> atoms;
  };

  /// local[i] is the condition for channel lo + i + 1.
  ChainProtocol(Channel lo, std::vector<ChannelData> channels, std::vector<std::shared_ptr<const LocalCondition>> local)
      : lo_(lo), channels_(std::move(channels)), local_(std::move(local)) {
    if (channels_.empty()) throw ProtocolError("protocol window must contain at least one channel");
    if (local_.size() + 1 != channels_.size())
      throw ProtocolError("expected one local condition per channel in (lo, hi]");
    for (auto& c : channels_) {
      if (!c.values || c.values->size() == 0) throw ProtocolError("value set must be nonempty");
      if (!c.atoms) c.atoms = std::make_shared<ExplicitAtoms>();
    }
    for (const auto& l : local_)
      if (!l) throw ProtocolError("missing local condition");
  }

  Channel lo() const noexcept { return lo_; }
  Channel hi() const noexcept { return lo_ + static_cast<Channel>(channels_.size()) - 1; }
  std::size_t width() const noexcept { return channels_.size(); }
  bool in_window(Channel k) const noexcept { return k >= lo_ && k <= hi(); }

  const ValueDomain& values(Channel k) const { return *channel(k).values; }
  const AtomTable& atoms(Channel k) const { return *channel(k).atoms; }
  const LocalCondition& local(Channel k) const {
    if (k <= lo_ || k > hi()) throw std::out_of_range("no modeled local condition at channel " + std::to_string(k));
    return *local_[static_cast<std::size_t>(k - lo_ - 1)];
  }

  /// Maps labels (one per in-window channel) to a Run; throws on unknown labels.
  Run make_run(std::span<const std::string> labels) const {
    if (labels.size() != width())
      throw ProtocolError("run has " + std::to_string(labels.size()) + " values; window has " +
                          std::to_string(width()) + " channels");
    std::vector<ValueIndex> values;
    values.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      Channel k = lo_ + static_cast<Channel>(i);
      auto idx = channels_[i].values->index_of(labels[i]);
      if (!idx) throw ProtocolError("value '" + labels[i] + "' is not in V_" + std::to_string(k));
      values.push_back(*idx);
    }
    return Run(lo_, std::move(values));
  }

  Run make_run(std::initializer_list<std::string> labels) const {
    std::vector<std::string> v(labels);
    return make_run(std::span<const std::string>(v));
  }

  std::vector<std::string> labels(const Run& r) const {
    std::vector<std::string> out;
    out.reserve(r.width());
    for (Channel k = r.lo(); k <= r.hi(); ++k) out.push_back(values(k).label(r.at(k)));
    return out;
  }

  bool is_run(const Run& r) const {
    if (r.lo() != lo_ || r.width() != width()) return false;
    for (Channel k = lo_; k <= hi(); ++k)
      if (r.at(k) >= values(k).size()) return false;
    for (Channel k = lo_ + 1; k <= hi(); ++k)
      if (!local(k).allows(r.at(k - 1), r.at(k))) return false;
    return true;
  }

 private:
  const ChannelData& channel(Channel k) const {
    if (!in_window(k)) throw std::out_of_range("channel " + std::to_string(k) + " outside the protocol window");
    return channels_[static_cast<std::size_t>(k - lo_)];
  }

  Channel lo_;
  std::vector<ChannelData> channels_;
  std::vector<std::shared_ptr<const LocalCondition>> local_;
};

/// True iff the labelled assignment satisfies every local condition. Throws
/// if a label is not in its channel's value set.
inline bool is_run(const ChainProtocol& p, std::span<const std::string> labels) { return p.is_run(p.make_run(labels)); }

inline bool is_run(const ChainProtocol& p, std::initializer_list<std::string> labels) {
  return p.is_run(p.make_run(labels));
}

// ---------------------------------------------------------------------------
// Plain-data protocol description (the file format's in-memory form)

struct ProtocolDescription {
  struct ChannelEntry {
    Channel index = 0;
    std::vector<std::string> values;
    std::map<std::string, std::vector<std::string>> atoms;
  };
  struct LocalEntry {
    Channel channel = 0;
    std::vector<std::pair<std::string, std::string>> pairs;
  };

  Channel lo = 0;
  Channel hi = 0;
  std::vector<ChannelEntry> channels;
  std::vector<LocalEntry> local;
};

struct Violation {
  Channel channel = 0;
  std::optional<std::string> value;
  std::string message;

  std::string to_string() const {
    std::string out = "channel " + std::to_string(channel);
    if (value) out += ", value '" + *value + "'";
    return out + ": " + message;
  }
};

namespace detail {

inline void continuity_violations(const ChainProtocol& p, std::vector<Violation>& out) {
  for (Channel k = p.lo() + 1; k <= p.hi(); ++k) {
    const ValueDomain& prev = p.values(k - 1);
    const LocalCondition& l = p.local(k);
    for (ValueIndex u = 0; u < prev.size(); ++u)
      if (!l.has_successor(u))
        out.push_back({k, prev.label(u), "value of channel " + std::to_string(k - 1) + " has no successor under L_" +
                                             std::to_string(k)});
  }
}

}  // namespace detail

/// Well-formedness (and optionally continuity) violations of a description.
inline std::vector<Violation> validate(const ProtocolDescription& d, bool require_continuity) {
  std::vector<Violation> out;
  if (d.hi < d.lo) {
    out.push_back({d.lo, std::nullopt, "window upper bound is below lower bound"});
    return out;
  }
  std::map<Channel, const ProtocolDescription::ChannelEntry*> by_index;
  for (const auto& c : d.channels) {
    if (c.index < d.lo || c.index > d.hi) {
      out.push_back({c.index, std::nullopt, "channel outside the window"});
      continue;
    }
    if (!by_index.emplace(c.index, &c).second) out.push_back({c.index, std::nullopt, "channel listed more than once"});
  }
  for (Channel k = d.lo; k <= d.hi; ++k)
    if (!by_index.count(k)) out.push_back({k, std::nullopt, "in-window channel missing"});

  std::map<Channel, std::set<std::string>> value_sets;
  for (const auto& [k, c] : by_index) {
    std::set<std::string>& vs = value_sets[k];
    for (const auto& v : c->values)
      if (!vs.insert(v).second) out.push_back({k, v, "duplicate value label"});
    if (vs.empty()) out.push_back({k, std::nullopt, "value set is empty"});
    for (const auto& [name, truth] : c->atoms) {
      for (const auto& v : truth)
        if (!vs.count(v)) out.push_back({k, v, "atom '" + name + "' is true at a value outside V_" + std::to_string(k)});
    }
  }

  std::map<Channel, const ProtocolDescription::LocalEntry*> local_by_channel;
  for (const auto& l : d.local) {
    if (l.channel <= d.lo || l.channel > d.hi) {
      out.push_back({l.channel, std::nullopt, "local condition outside (lo, hi]"});
      continue;
    }
    if (!local_by_channel.emplace(l.channel, &l).second)
      out.push_back({l.channel, std::nullopt, "local condition listed more than once"});
  }
  for (Channel k = d.lo + 1; k <= d.hi; ++k)
    if (!local_by_channel.count(k)) out.push_back({k, std::nullopt, "local condition missing"});

  for (const auto& [k, l] : local_by_channel) {
    const auto& prev = value_sets[k - 1];
    const auto& next = value_sets[k];
    for (const auto& [u, v] : l->pairs) {
      if (!prev.count(u)) out.push_back({k, u, "pair source not in V_" + std::to_string(k - 1)});
      if (!next.count(v)) out.push_back({k, v, "pair target not in V_" + std::to_string(k)});
    }
  }

  if (require_continuity && out.empty()) {
    for (const auto& [k, l] : local_by_channel) {
      std::set<std::string> has_succ;
      for (const auto& pr : l->pairs) has_succ.insert(pr.first);
      for (const auto& u : by_index.at(k - 1)->values)
        if (!has_succ.count(u))
          out.push_back({k, u, "value of channel " + std::to_string(k - 1) + " has no successor under L_" +
                                   std::to_string(k)});
    }
  }
  return out;
}

/// Violations of a built protocol. Structural invariants hold by
/// construction, so only continuity can fail.
inline std::vector<Violation> validate(const ChainProtocol& p, bool require_continuity) {
  std::vector<Violation> out;
  if (require_continuity) detail::continuity_violations(p, out);
  return out;
}

/// Builds a protocol with explicit relations; throws ProtocolError when the
/// description is not well formed. Continuity is not required.
inline ChainProtocol build_protocol(const ProtocolDescription& d) {
  auto violations = validate(d, false);
  if (!violations.empty()) {
    std::string msg = "malformed protocol:";
    for (const auto& v : violations) msg += "\n  " + v.to_string();
    throw ProtocolError(msg);
  }
  std::map<Channel, const ProtocolDescription::ChannelEntry*> by_index;
  for (const auto& c : d.channels) by_index[c.index] = &c;

  std::vector<ChainProtocol::ChannelData> channels;
  std::vector<std::shared_ptr<const ExplicitDomain>> domains;
  for (Channel k = d.lo; k <= d.hi; ++k) {
    const auto& c = *by_index.at(k);
    auto domain = std::make_shared<const ExplicitDomain>(c.values);
    std::map<std::string, std::vector<bool>, std::less<>> truth;
    for (const auto& [name, labels] : c.atoms) {
      std::vector<bool> row(domain->size(), false);
      for (const auto& l : labels) row[*domain->index_of(l)] = true;
      truth.emplace(name, std::move(row));
    }
    channels.push_back({domain, std::make_shared<const ExplicitAtoms>(std::move(truth))});
    domains.push_back(domain);
  }
  std::vector<std::shared_ptr<const LocalCondition>> local;
  for (Channel k = d.lo + 1; k <= d.hi; ++k) {
    const auto& prev = *domains[static_cast<std::size_t>(k - 1 - d.lo)];
    const auto& next = *domains[static_cast<std::size_t>(k - d.lo)];
    std::vector<std::pair<ValueIndex, ValueIndex>> pairs;
    for (const auto& l : d.local) {
      if (l.channel != k) continue;
      for (const auto& [u, v] : l.pairs) pairs.emplace_back(*prev.index_of(u), *next.index_of(v));
    }
    local.push_back(std::make_shared<const PairRelation>(prev.size(), next.size(), pairs));
  }
  return ChainProtocol(d.lo, std::move(channels), std::move(local));
}

/// Extensional description of a protocol. Enumerates every value, pair and
/// atom, so it is only meant for small protocols.
inline ProtocolDescription describe(const ChainProtocol& p) {
  ProtocolDescription d;
  d.lo = p.lo();
  d.hi = p.hi();
  for (Channel k = p.lo(); k <= p.hi(); ++k) {
    ProtocolDescription::ChannelEntry c;
    c.index = k;
    const ValueDomain& dom = p.values(k);
    for (ValueIndex i = 0; i < dom.size(); ++i) c.values.push_back(dom.label(i));
    for (const auto& name : p.atoms(k).names()) {
      auto& labels = c.atoms[name];
      for (ValueIndex i = 0; i < dom.size(); ++i)
        if (p.atoms(k).truth(name, i).value_or(false)) labels.push_back(dom.label(i));
    }
    d.channels.push_back(std::move(c));
  }
  for (Channel k = p.lo() + 1; k <= p.hi(); ++k) {
    ProtocolDescription::LocalEntry l;
    l.channel = k;
    const ValueDomain& prev = p.values(k - 1);
    const ValueDomain& next = p.values(k);
    for (ValueIndex u = 0; u < prev.size(); ++u)
      for (ValueIndex v : p.local(k).successors(u)) l.pairs.emplace_back(prev.label(u), next.label(v));
    d.local.push_back(std::move(l));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace detail {

/// Either every value of a channel or a sorted subset of them.
class ValueSet {
 public:
  static ValueSet all() { return ValueSet(true, {}); }
  static ValueSet of(std::vector<ValueIndex> sorted) { return ValueSet(false, std::move(sorted)); }

  bool is_all() const noexcept { return all_; }
  const std::vector<ValueIndex>& members() const noexcept { return members_; }
  bool contains(ValueIndex v) const { return all_ || std::binary_search(members_.begin(), members_.end(), v); }

  ValueSet intersect(const ValueSet& other) const {
    if (all_) return other;
    if (other.all_) return *this;
    std::vector<ValueIndex> out;
    std::set_intersection(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                          std::back_inserter(out));
    return of(std::move(out));
  }

 private:
  ValueSet(bool all, std::vector<ValueIndex> members) : all_(all), members_(std::move(members)) {}
  bool all_;
  std::vector<ValueIndex> members_;
};

inline void sort_unique(std::vector<ValueIndex>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

/// Lexicographic enumeration of partial paths over channels [from, to],
/// optionally pinned at either end. The layered graph is trimmed first so the
/// depth-first walk never reaches a dead end.
class PathEnumerator {
 public:
  PathEnumerator(const ChainProtocol& p, Channel from, Channel to, std::optional<ValueIndex> start,
                 std::optional<ValueIndex> end)
      : p_(&p), from_(from), layers_(static_cast<std::size_t>(to - from + 1)) {
    trim(start, end);
    reset();
  }

  void reset() {
    started_ = false;
    exhausted_ = alive_[0].is_all() ? false : alive_[0].members().empty();
  }

  std::size_t layers() const noexcept { return layers_; }

  /// Writes the next path (one value per channel) into out.
  bool next(std::vector<ValueIndex>& out) {
    if (exhausted_) return false;
    std::size_t depth;
    if (!started_) {
      started_ = true;
      cand_.assign(layers_, {});
      pos_.assign(layers_, 0);
      current_.assign(layers_, 0);
      cand_[0] = materialize(alive_[0], from_);
      depth = 0;
    } else {
      depth = layers_ - 1;
      ++pos_[depth];
    }
    while (true) {
      if (pos_[depth] >= cand_[depth].size()) {
        if (depth == 0) {
          exhausted_ = true;
          return false;
        }
        --depth;
        ++pos_[depth];
        continue;
      }
      current_[depth] = cand_[depth][pos_[depth]];
      if (depth + 1 == layers_) {
        out = current_;
        return true;
      }
      ++depth;
      Channel k = from_ + static_cast<Channel>(depth);
      std::vector<ValueIndex> succ = p_->local(k).successors(current_[depth - 1]);
      const ValueSet& alive = alive_[depth];
      if (!alive.is_all())
        succ.erase(std::remove_if(succ.begin(), succ.end(), [&](ValueIndex v) { return !alive.contains(v); }),
                   succ.end());
      cand_[depth] = std::move(succ);
      pos_[depth] = 0;
    }
  }

 private:
  std::vector<ValueIndex> materialize(const ValueSet& s, Channel k) const {
    if (!s.is_all()) return s.members();
    std::vector<ValueIndex> out(p_->values(k).size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<ValueIndex>(i);
    return out;
  }

  void trim(std::optional<ValueIndex> start, std::optional<ValueIndex> end) {
    std::vector<ValueSet> fwd;
    fwd.reserve(layers_);
    fwd.push_back(start ? ValueSet::of({*start}) : ValueSet::all());
    for (std::size_t j = 1; j < layers_; ++j) {
      if (fwd.back().is_all()) {
        fwd.push_back(ValueSet::all());
        continue;
      }
      const LocalCondition& l = p_->local(from_ + static_cast<Channel>(j));
      std::vector<ValueIndex> reach;
      for (ValueIndex u : fwd.back().members()) {
        auto s = l.successors(u);
        reach.insert(reach.end(), s.begin(), s.end());
      }
      sort_unique(reach);
      fwd.push_back(ValueSet::of(std::move(reach)));
    }

    alive_.assign(layers_, ValueSet::all());
    alive_[layers_ - 1] = fwd[layers_ - 1].intersect(end ? ValueSet::of({*end}) : ValueSet::all());
    for (std::size_t j = layers_ - 1; j-- > 0;) {
      Channel k = from_ + static_cast<Channel>(j);
      const LocalCondition& l = p_->local(k + 1);
      if (alive_[j + 1].is_all()) {
        std::vector<ValueIndex> keep;
        bool everything = true;
        std::vector<ValueIndex> candidates = materialize(fwd[j], k);
        for (ValueIndex u : candidates) {
          if (l.has_successor(u))
            keep.push_back(u);
          else
            everything = false;
        }
        alive_[j] = (fwd[j].is_all() && everything) ? ValueSet::all() : ValueSet::of(std::move(keep));
      } else {
        std::vector<ValueIndex> preds;
        for (ValueIndex v : alive_[j + 1].members()) {
          auto s = l.predecessors(v);
          preds.insert(preds.end(), s.begin(), s.end());
        }
        sort_unique(preds);
        alive_[j] = fwd[j].intersect(ValueSet::of(std::move(preds)));
      }
    }
  }

  const ChainProtocol* p_;
  Channel from_;
  std::size_t layers_;
  std::vector<ValueSet> alive_;
  bool started_ = false;
  bool exhausted_ = false;
  std::vector<std::vector<ValueIndex>> cand_;
  std::vector<std::size_t> pos_;
  std::vector<ValueIndex> current_;
};

}  // namespace detail

/// Lazy, lexicographically ordered stream of runs. The protocol must outlive
/// the stream.
class RunStream {
 public:
  /// All runs of p.
  explicit RunStream(const ChainProtocol& p)
      : p_(&p), left_(std::make_unique<detail::PathEnumerator>(p, p.lo(), p.hi(), std::nullopt, std::nullopt)) {}

  /// Runs of p whose value at in-window channel k is v.
  RunStream(const ChainProtocol& p, Channel k, ValueIndex v) : p_(&p), split_(k) {
    if (!p.in_window(k)) throw ProtocolError("channel " + std::to_string(k) + " is outside the protocol window");
    if (v >= p.values(k).size()) throw ProtocolError("value index out of range for channel " + std::to_string(k));
    left_ = std::make_unique<detail::PathEnumerator>(p, p.lo(), k, std::nullopt, v);
    if (k < p.hi()) right_ = std::make_unique<detail::PathEnumerator>(p, k, p.hi(), v, std::nullopt);
  }

  bool next(Run& out) {
    if (!right_) {
      if (!left_->next(left_path_)) return false;
      out = Run(p_->lo(), left_path_);
      return true;
    }
    while (true) {
      if (have_left_ && right_->next(right_path_)) {
        std::vector<ValueIndex> values = left_path_;
        values.insert(values.end(), right_path_.begin() + 1, right_path_.end());
        out = Run(p_->lo(), std::move(values));
        return true;
      }
      if (!left_->next(left_path_)) return false;
      have_left_ = true;
      right_->reset();
    }
  }

  std::optional<Run> next() {
    Run r;
    if (!next(r)) return std::nullopt;
    return r;
  }

  std::vector<Run> collect() {
    std::vector<Run> out;
    Run r;
    while (next(r)) out.push_back(r);
    return out;
  }

 private:
  const ChainProtocol* p_;
  std::optional<Channel> split_;
  std::unique_ptr<detail::PathEnumerator> left_;
  std::unique_ptr<detail::PathEnumerator> right_;
  std::vector<ValueIndex> left_path_;
  std::vector<ValueIndex> right_path_;
  bool have_left_ = false;
};

inline RunStream runs(const ChainProtocol& p) { return RunStream(p); }

inline RunStream runs_fixing(const ChainProtocol& p, Channel k, ValueIndex v) { return RunStream(p, k, v); }

inline RunStream runs_fixing(const ChainProtocol& p, Channel k, std::string_view label) {
  if (!p.in_window(k)) throw ProtocolError("channel " + std::to_string(k) + " is outside the protocol window");
  auto v = p.values(k).index_of(label);
  if (!v) throw ProtocolError("value '" + std::string(label) + "' is not in V_" + std::to_string(k));
  return RunStream(p, k, *v);
}

// ---------------------------------------------------------------------------
// Counting

class CountOverflow : public std::overflow_error {
 public:
  CountOverflow() : std::overflow_error("run count exceeds 64-bit range") {}
};

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw CountOverflow();
  return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw CountOverflow();
  return r;
}

/// Number of partial paths from channel `from` ending at each value of `to`;
/// start restricts the first channel to a single value.
inline std::vector<std::uint64_t> forward_counts(const ChainProtocol& p, Channel from, Channel to,
                                                 std::optional<ValueIndex> start) {
  std::vector<std::uint64_t> counts(p.values(from).size(), start ? 0 : 1);
  if (start) counts.at(*start) = 1;
  for (Channel k = from + 1; k <= to; ++k) {
    std::vector<std::uint64_t> next(p.values(k).size(), 0);
    const LocalCondition& l = p.local(k);
    for (ValueIndex u = 0; u < counts.size(); ++u) {
      if (counts[u] == 0) continue;
      for (ValueIndex v : l.successors(u)) next[v] = checked_add(next[v], counts[u]);
    }
    counts = std::move(next);
  }
  return counts;
}

}  // namespace detail

/// Number of runs, by left-to-right path counting.
inline std::uint64_t run_count(const ChainProtocol& p) {
  std::uint64_t total = 0;
  for (std::uint64_t c : detail::forward_counts(p, p.lo(), p.hi(), std::nullopt)) total = detail::checked_add(total, c);
  return total;
}

/// Number of runs with value v at in-window channel k.
inline std::uint64_t run_count_fixing(const ChainProtocol& p, Channel k, ValueIndex v) {
  if (!p.in_window(k)) throw ProtocolError("channel " + std::to_string(k) + " is outside the protocol window");
  std::uint64_t left = detail::forward_counts(p, p.lo(), k, std::nullopt).at(v);
  std::uint64_t right = 0;
  for (std::uint64_t c : detail::forward_counts(p, k, p.hi(), v)) right = detail::checked_add(right, c);
  return detail::checked_mul(left, right);
}

// ---------------------------------------------------------------------------
// Splicing

namespace detail {
inline void require_same_shape(const Run& a, const Run& b) {
  if (a.lo() != b.lo() || a.width() != b.width()) throw ProtocolError("runs belong to different windows");
}
}  // namespace detail

/// r1 up to channel k, r2 from channel k on. Requires r1(k) == r2(k).
inline Run splice(const Run& r1, const Run& r2, Channel k) {
  detail::require_same_shape(r1, r2);
  if (!r1.agrees_at(r2, k)) throw ProtocolError("splice midpoint mismatch at channel " + std::to_string(k));
  std::vector<ValueIndex> out(r1.width());
  for (Channel x = r1.lo(); x <= r1.hi(); ++x)
    out[static_cast<std::size_t>(x - r1.lo())] = x <= k ? r1.at(x) : r2.at(x);
  return Run(r1.lo(), std::move(out));
}

/// r below channel n, rp from channel n on. Requires r(n) == rp(n).
inline Run prefix_splice(const Run& r, const Run& rp, Channel n) {
  detail::require_same_shape(r, rp);
  if (!r.agrees_at(rp, n)) throw ProtocolError("prefix splice boundary mismatch at channel " + std::to_string(n));
  std::vector<ValueIndex> out(r.width());
  for (Channel x = r.lo(); x <= r.hi(); ++x) out[static_cast<std::size_t>(x - r.lo())] = x < n ? r.at(x) : rp.at(x);
  return Run(r.lo(), std::move(out));
}

}  // namespace chainlogic
