#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chainlogic {

/// Index of a communication channel on the (conceptually infinite) chain.
using Channel = std::int64_t;

/// Immutable formula over the four core constructors: bottom, channel-tagged
/// atoms, implication and the channel box. Sugar (negation, conjunction,
/// disjunction, truth, diamond) is expanded by the helper constructors below
/// and never appears as a node.
///
/// Formulas are cheap to copy: subterms are shared. Equality is structural.
class Formula {
 public:
  enum class Kind : std::uint8_t { Bottom, Atom, Implies, Box };

  Formula() : Formula(bottom()) {}

  static Formula bottom() {
    static const Formula b{std::make_shared<const Node>(Node{Kind::Bottom, 0, {}, nullptr, nullptr, 0x9e3779b97f4a7c15ULL, 1})};
    return b;
  }

  static Formula atom(Channel channel, std::string name) {
    std::size_t h = mix(0x51ed2701ULL, std::hash<std::string>{}(name));
    h = mix(h, static_cast<std::size_t>(channel));
    return Formula{std::make_shared<const Node>(Node{Kind::Atom, channel, std::move(name), nullptr, nullptr, h, 1})};
  }

  static Formula implies(Formula lhs, Formula rhs) {
    std::size_t h = mix(mix(0x2545f491ULL, lhs.node_->hash), rhs.node_->hash);
    std::size_t size = lhs.node_->size + rhs.node_->size + 1;
    return Formula{std::make_shared<const Node>(Node{Kind::Implies, 0, {}, std::move(lhs.node_), std::move(rhs.node_), h, size})};
  }

  static Formula box(Channel channel, Formula body) {
    std::size_t h = mix(mix(0x6c8e9cf5ULL, static_cast<std::size_t>(channel)), body.node_->hash);
    std::size_t size = body.node_->size + 1;
    return Formula{std::make_shared<const Node>(Node{Kind::Box, channel, {}, std::move(body.node_), nullptr, h, size})};
  }

  // Derived connectives, expanded through -> and false.
  static Formula truth() { return implies(bottom(), bottom()); }
  static Formula negation(Formula f) { return implies(std::move(f), bottom()); }
  static Formula disjunction(Formula a, Formula b) { return implies(negation(std::move(a)), std::move(b)); }
  static Formula conjunction(Formula a, Formula b) {
    return negation(implies(std::move(a), negation(std::move(b))));
  }
  static Formula diamond(Channel channel, Formula f) { return negation(box(channel, negation(std::move(f)))); }
  static Formula biconditional(const Formula& a, const Formula& b) {
    return conjunction(implies(a, b), implies(b, a));
  }

  Kind kind() const noexcept { return node_->kind; }
  bool is_bottom() const noexcept { return node_->kind == Kind::Bottom; }
  bool is_atom() const noexcept { return node_->kind == Kind::Atom; }
  bool is_implies() const noexcept { return node_->kind == Kind::Implies; }
  bool is_box() const noexcept { return node_->kind == Kind::Box; }

  /// Channel of an atom or box.
  Channel channel() const {
    require(is_atom() || is_box(), "channel() on a formula that is neither atom nor box");
    return node_->channel;
  }
  const std::string& name() const {
    require(is_atom(), "name() on a non-atom");
    return node_->name;
  }
  Formula lhs() const {
    require(is_implies(), "lhs() on a non-implication");
    return Formula{node_->left};
  }
  Formula rhs() const {
    require(is_implies(), "rhs() on a non-implication");
    return Formula{node_->right};
  }
  Formula body() const {
    require(is_box(), "body() on a non-box");
    return Formula{node_->left};
  }

  std::size_t hash() const noexcept { return node_->hash; }
  /// Number of nodes in the tree (shared subterms counted per occurrence).
  std::size_t size() const noexcept { return node_->size; }
  /// Same underlying node, not merely equal.
  bool same_node(const Formula& other) const noexcept { return node_ == other.node_; }

  friend bool operator==(const Formula& a, const Formula& b) { return equal(a.node_.get(), b.node_.get()); }

 private:
  struct Node {
    Kind kind;
    Channel channel;
    std::string name;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
    std::size_t hash;
    std::size_t size;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static std::size_t mix(std::size_t seed, std::size_t value) {
    return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  }

  static void require(bool ok, const char* what) {
    if (!ok) throw std::logic_error(what);
  }

  static bool equal(const Node* a, const Node* b) {
    while (true) {
      if (a == b) return true;
      if (a->kind != b->kind || a->hash != b->hash || a->size != b->size) return false;
      switch (a->kind) {
        case Kind::Bottom:
          return true;
        case Kind::Atom:
          return a->channel == b->channel && a->name == b->name;
        case Kind::Box:
          if (a->channel != b->channel) return false;
          a = a->left.get();
          b = b->left.get();
          continue;
        case Kind::Implies:
          if (!equal(a->left.get(), b->left.get())) return false;
          a = a->right.get();
          b = b->right.get();
          continue;
      }
      return false;
    }
  }

  std::shared_ptr<const Node> node_;
};

struct FormulaHash {
  std::size_t operator()(const Formula& f) const noexcept { return f.hash(); }
};

// ---------------------------------------------------------------------------
// Scopes

/// Integer extended with -inf and +inf, used for min/max of possibly empty
/// channel sets.
class ExtendedChannel {
 public:
  static constexpr ExtendedChannel neg_inf() { return ExtendedChannel{-1, 0}; }
  static constexpr ExtendedChannel pos_inf() { return ExtendedChannel{1, 0}; }
  static constexpr ExtendedChannel finite(Channel v) { return ExtendedChannel{0, v}; }

  constexpr bool is_finite() const { return tier_ == 0; }
  constexpr Channel value() const { return value_; }

  friend constexpr auto operator<=>(const ExtendedChannel&, const ExtendedChannel&) = default;
  friend constexpr bool operator==(const ExtendedChannel&, const ExtendedChannel&) = default;
  friend constexpr auto operator<=>(const ExtendedChannel& a, Channel b) { return a <=> finite(b); }
  friend constexpr bool operator==(const ExtendedChannel& a, Channel b) { return a == finite(b); }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedChannel& c) {
    if (c.tier_ < 0) return os << "-inf";
    if (c.tier_ > 0) return os << "+inf";
    return os << c.value_;
  }

 private:
  constexpr ExtendedChannel(int tier, Channel value) : tier_(tier), value_(value) {}
  int tier_;  // ordered first, so -inf < every finite < +inf
  Channel value_;
};

/// Finite set of channel indices; min of the empty set is +inf and max is -inf.
class Scope {
 public:
  Scope() = default;
  Scope(std::initializer_list<Channel> channels) : indices_(channels) {}
  explicit Scope(std::set<Channel> channels) : indices_(std::move(channels)) {}

  const std::set<Channel>& indices() const& noexcept { return indices_; }
  std::set<Channel> indices() && noexcept { return std::move(indices_); }
  bool empty() const noexcept { return indices_.empty(); }
  std::size_t size() const noexcept { return indices_.size(); }
  bool contains(Channel k) const { return indices_.count(k) != 0; }

  ExtendedChannel min() const {
    return indices_.empty() ? ExtendedChannel::pos_inf() : ExtendedChannel::finite(*indices_.begin());
  }
  ExtendedChannel max() const {
    return indices_.empty() ? ExtendedChannel::neg_inf() : ExtendedChannel::finite(*indices_.rbegin());
  }

  bool subset_of(const std::set<Channel>& other) const {
    for (Channel k : indices_)
      if (!other.count(k)) return false;
    return true;
  }

  void insert(Channel k) { indices_.insert(k); }
  void merge(const Scope& other) { indices_.insert(other.indices_.begin(), other.indices_.end()); }

  friend bool operator==(const Scope&, const Scope&) = default;

  /// Renders as {a, b, c}.
  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for (Channel k : indices_) {
      if (!first) out += ", ";
      out += std::to_string(k);
      first = false;
    }
    return out + "}";
  }

 private:
  std::set<Channel> indices_;
};

/// The least A with f in Phi(A): only the outermost atoms and boxes count.
inline Scope scope(const Formula& f) {
  Scope result;
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula g = std::move(stack.back());
    stack.pop_back();
    switch (g.kind()) {
      case Formula::Kind::Bottom:
        break;
      case Formula::Kind::Atom:
      case Formula::Kind::Box:
        result.insert(g.channel());
        break;
      case Formula::Kind::Implies:
        stack.push_back(g.rhs());
        stack.push_back(g.lhs());
        break;
    }
  }
  return result;
}

/// True iff f belongs to Phi(a).
inline bool member_phi(const Formula& f, const std::set<Channel>& a) { return scope(f).subset_of(a); }

/// Every channel mentioned anywhere in f, including under boxes.
inline std::set<Channel> channels(const Formula& f) {
  std::set<Channel> out;
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula g = std::move(stack.back());
    stack.pop_back();
    switch (g.kind()) {
      case Formula::Kind::Bottom:
        break;
      case Formula::Kind::Atom:
        out.insert(g.channel());
        break;
      case Formula::Kind::Box:
        out.insert(g.channel());
        stack.push_back(g.body());
        break;
      case Formula::Kind::Implies:
        stack.push_back(g.rhs());
        stack.push_back(g.lhs());
        break;
    }
  }
  return out;
}

/// Shifts every channel index in f by delta.
inline Formula shift_channels(const Formula& f, Channel delta) {
  switch (f.kind()) {
    case Formula::Kind::Bottom:
      return f;
    case Formula::Kind::Atom:
      return Formula::atom(f.channel() + delta, f.name());
    case Formula::Kind::Box:
      return Formula::box(f.channel() + delta, shift_channels(f.body(), delta));
    case Formula::Kind::Implies:
      return Formula::implies(shift_channels(f.lhs(), delta), shift_channels(f.rhs(), delta));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Concrete syntax

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + message), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  Formula parse_all() {
    Formula f = parse_impl();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  // impl := or ("->" impl)?
  Formula parse_impl() {
    Formula lhs = parse_or();
    skip_ws();
    if (text_.substr(pos_, 2) == "->") {
      pos_ += 2;
      return Formula::implies(std::move(lhs), parse_impl());
    }
    return lhs;
  }

  // or := and ("|" and)*   (left-associative)
  Formula parse_or() {
    Formula acc = parse_and();
    while (true) {
      skip_ws();
      if (!eat('|')) return acc;
      acc = Formula::disjunction(std::move(acc), parse_and());
    }
  }

  // and := unary ("&" unary)*   (left-associative)
  Formula parse_and() {
    Formula acc = parse_unary();
    while (true) {
      skip_ws();
      if (!eat('&')) return acc;
      acc = Formula::conjunction(std::move(acc), parse_unary());
    }
  }

  Formula parse_unary() {
    skip_ws();
    if (eat('!')) return Formula::negation(parse_unary());
    if (eat('[')) {
      Channel k = parse_int();
      skip_ws();
      expect(']');
      return Formula::box(k, parse_unary());
    }
    if (peek() == '<') {
      ++pos_;
      Channel k = parse_int();
      skip_ws();
      expect('>');
      return Formula::diamond(k, parse_unary());
    }
    return parse_primary();
  }

  Formula parse_primary() {
    skip_ws();
    if (eat('(')) {
      Formula f = parse_impl();
      skip_ws();
      expect(')');
      return f;
    }
    if (!is_ident_start(peek())) fail("expected a formula");
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    std::string ident(text_.substr(start, pos_ - start));
    std::size_t after_ident = pos_;
    skip_ws();
    if (peek() == '@') {
      ++pos_;
      return Formula::atom(parse_int(), std::move(ident));
    }
    if (ident == "false") return Formula::bottom();
    if (ident == "true") return Formula::truth();
    pos_ = after_ident;
    fail("expected '@' after atom name '" + ident + "'");
  }

  Channel parse_int() {
    skip_ws();
    std::size_t start = pos_;
    bool negative = eat('-');
    if (!is_digit(peek())) fail("expected an integer channel index");
    // Accumulate as a negative number so that the minimum value is representable.
    Channel value = 0;
    while (is_digit(peek())) {
      Channel digit = text_[pos_] - '0';
      if (value < (std::numeric_limits<Channel>::min() + digit) / 10)
        throw ParseError(start, "channel index out of range");
      value = value * 10 - digit;
      ++pos_;
    }
    if (!negative) {
      if (value == std::numeric_limits<Channel>::min()) throw ParseError(start, "channel index out of range");
      value = -value;
    }
    return value;
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
  static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  bool eat(char c) {
    if (peek() != c || pos_ >= text_.size()) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(pos_, message); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline void render_into(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case Formula::Kind::Bottom:
      out += "false";
      return;
    case Formula::Kind::Atom:
      out += f.name();
      out += '@';
      out += std::to_string(f.channel());
      return;
    case Formula::Kind::Box:
      out += '[';
      out += std::to_string(f.channel());
      out += ']';
      render_into(f.body(), out);
      return;
    case Formula::Kind::Implies:
      out += '(';
      render_into(f.lhs(), out);
      out += " -> ";
      render_into(f.rhs(), out);
      out += ')';
      return;
  }
}

}  // namespace detail

/// Parses the ASCII formula syntax. Sugar is expanded into core constructors.
inline Formula parse(std::string_view text) { return detail::FormulaParser(text).parse_all(); }

/// Canonical, fully parenthesised core syntax. parse(render(f)) == f.
inline std::string render(const Formula& f) {
  std::string out;
  detail::render_into(f, out);
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Formula& f) { return os << render(f); }

}  // namespace chainlogic
