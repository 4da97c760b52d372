#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "chainlogic/formula.hpp"
#include "chainlogic/protocol.hpp"

namespace chainlogic {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalOptions {
  /// Cache box results per (channel, value at that channel, body).
  bool memoize = true;
  /// Reject boxes over channels outside the window instead of quantifying
  /// over all runs.
  bool strict_window = false;
};

/// Evaluation state for one protocol. Not safe to share between threads;
/// give each thread its own context.
class EvalContext {
 public:
  explicit EvalContext(ChainProtocol protocol, EvalOptions options = {})
      : protocol_(std::move(protocol)), options_(options) {}

  EvalContext(const EvalContext&) = delete;
  EvalContext& operator=(const EvalContext&) = delete;

  const ChainProtocol& protocol() const noexcept { return protocol_; }
  const EvalOptions& options() const noexcept { return options_; }
  std::size_t memo_size() const noexcept { return memo_.size(); }
  void clear_memo() { memo_.clear(); }

 private:
  friend class Evaluator;

  // Box channels outside the window all share this value marker.
  static constexpr ValueIndex kDefaultValue = std::numeric_limits<ValueIndex>::max();

  struct MemoKey {
    Channel channel;
    ValueIndex value;
    Formula body;
    friend bool operator==(const MemoKey& a, const MemoKey& b) {
      return a.channel == b.channel && a.value == b.value && (a.body.same_node(b.body) || a.body == b.body);
    }
  };
  struct MemoKeyHash {
    std::size_t operator()(const MemoKey& k) const noexcept {
      std::size_t h = k.body.hash();
      h ^= std::hash<Channel>{}(k.channel) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h ^= std::hash<ValueIndex>{}(k.value) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h;
    }
  };

  ChainProtocol protocol_;
  EvalOptions options_;
  std::unordered_map<MemoKey, bool, MemoKeyHash> memo_;
};

class Evaluator {
 public:
  explicit Evaluator(EvalContext& ctx) : ctx_(ctx), p_(ctx.protocol_) {}

  bool eval(const Run& r, const Formula& f) {
    check_run(r);
    return eval_unchecked(r, f);
  }

  std::optional<Run> first_failure(RunStream& stream, const Formula& f) {
    Run r;
    while (stream.next(r))
      if (!eval_unchecked(r, f)) return r;
    return std::nullopt;
  }

  /// Runs indistinguishable from r at channel k (all runs when k is outside
  /// the window).
  RunStream neighbours(const Run& r, Channel k) {
    if (p_.in_window(k)) return RunStream(p_, k, r.at(k));
    if (ctx_.options_.strict_window)
      throw EvalError("box channel " + std::to_string(k) + " is outside the protocol window [" +
                      std::to_string(p_.lo()) + ", " + std::to_string(p_.hi()) + "]");
    return RunStream(p_);
  }

  void check_run(const Run& r) const {
    if (r.lo() != p_.lo() || r.width() != p_.width())
      throw EvalError("run does not cover the protocol window");
    for (Channel k = p_.lo(); k <= p_.hi(); ++k)
      if (r.at(k) >= p_.values(k).size()) throw EvalError("run value out of range at channel " + std::to_string(k));
    if (!p_.is_run(r)) throw EvalError("assignment violates a local condition");
  }

  bool eval_unchecked(const Run& r, const Formula& f) {
    switch (f.kind()) {
      case Formula::Kind::Bottom:
        return false;
      case Formula::Kind::Atom:
        return atom(r, f);
      case Formula::Kind::Implies:
        return !eval_unchecked(r, f.lhs()) || eval_unchecked(r, f.rhs());
      case Formula::Kind::Box:
        return box(r, f.channel(), f.body());
    }
    return false;
  }

 private:
  bool atom(const Run& r, const Formula& f) const {
    const Channel k = f.channel();
    if (!p_.in_window(k))
      throw EvalError("atom " + f.name() + "@" + std::to_string(k) + " is undeclared: channel " + std::to_string(k) +
                      " is outside the protocol window");
    auto t = p_.atoms(k).truth(f.name(), r.at(k));
    if (!t) throw EvalError("atom " + f.name() + "@" + std::to_string(k) + " is not declared at channel " + std::to_string(k));
    return *t;
  }

  bool box(const Run& r, Channel k, const Formula& body) {
    const bool in_window = p_.in_window(k);
    if (!in_window && ctx_.options_.strict_window)
      throw EvalError("box channel " + std::to_string(k) + " is outside the protocol window [" +
                      std::to_string(p_.lo()) + ", " + std::to_string(p_.hi()) + "]");
    EvalContext::MemoKey key{k, in_window ? r.at(k) : EvalContext::kDefaultValue, body};
    if (ctx_.options_.memoize) {
      auto it = ctx_.memo_.find(key);
      if (it != ctx_.memo_.end()) return it->second;
    }
    RunStream stream = neighbours(r, k);
    const bool result = !first_failure(stream, body).has_value();
    if (ctx_.options_.memoize) ctx_.memo_.emplace(std::move(key), result);
    return result;
  }

  EvalContext& ctx_;
  const ChainProtocol& p_;
};

/// Truth of f at run r.
inline bool eval(EvalContext& ctx, const Run& r, const Formula& f) { return Evaluator(ctx).eval(r, f); }

/// First run (in enumeration order) at which f is false.
inline std::optional<Run> counterexample(EvalContext& ctx, const Formula& f) {
  Evaluator ev(ctx);
  RunStream stream(ctx.protocol());
  return ev.first_failure(stream, f);
}

/// True iff f holds at every run.
inline bool valid_in(EvalContext& ctx, const Formula& f) { return !counterexample(ctx, f).has_value(); }

/// For a box formula [k]body false at r: the first run agreeing with r at k
/// where body fails. Absent if the box holds at r.
inline std::optional<Run> box_counterexample(EvalContext& ctx, const Run& r, const Formula& box) {
  if (!box.is_box()) throw EvalError("box_counterexample needs a formula of the form [k]phi");
  Evaluator ev(ctx);
  ev.check_run(r);
  RunStream stream = ev.neighbours(r, box.channel());
  return ev.first_failure(stream, box.body());
}

}  // namespace chainlogic
