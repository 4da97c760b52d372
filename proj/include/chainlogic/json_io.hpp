#pragma once

// JSON file formats for protocols and proof scripts.

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "chainlogic/formula.hpp"
#include "chainlogic/proofcheck.hpp"
#include "chainlogic/protocol.hpp"

namespace chainlogic {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> required,
                         std::initializer_list<std::string_view> optional = {}) {
  if (!j.is_object()) throw FormatError(std::string(where) + ": expected an object");
  for (auto k : required)
    if (!j.contains(std::string(k))) throw FormatError(std::string(where) + ": missing key '" + std::string(k) + "'");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (auto k : required) known = known || it.key() == k;
    for (auto k : optional) known = known || it.key() == k;
    if (!known) throw FormatError(std::string(where) + ": unknown key '" + it.key() + "'");
  }
}

inline Channel get_channel(const json& j, std::string_view where) {
  if (!j.is_number_integer()) throw FormatError(std::string(where) + ": expected an integer");
  return j.get<Channel>();
}

inline std::size_t get_id(const json& j, std::string_view where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw FormatError(std::string(where) + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline std::string get_string(const json& j, std::string_view where) {
  if (!j.is_string()) throw FormatError(std::string(where) + ": expected a string");
  return j.get<std::string>();
}

inline Formula get_formula(const json& j, std::string_view where) {
  std::string text = get_string(j, where);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw FormatError(std::string(where) + ": " + e.what());
  }
}

inline json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Protocols

inline ProtocolDescription protocol_from_json(const nlohmann::json& j) {
  using detail::require_keys;
  require_keys(j, "protocol", {"window", "channels", "local"});
  const auto& w = j.at("window");
  if (!w.is_array() || w.size() != 2) throw FormatError("window: expected [lo, hi]");
  ProtocolDescription d;
  d.lo = detail::get_channel(w[0], "window[0]");
  d.hi = detail::get_channel(w[1], "window[1]");
  if (!j.at("channels").is_array()) throw FormatError("channels: expected an array");
  for (const auto& c : j.at("channels")) {
    require_keys(c, "channel entry", {"index", "values"}, {"atoms"});
    ProtocolDescription::ChannelEntry entry;
    entry.index = detail::get_channel(c.at("index"), "channel index");
    if (!c.at("values").is_array()) throw FormatError("values: expected an array");
    for (const auto& v : c.at("values")) entry.values.push_back(detail::get_string(v, "value label"));
    if (c.contains("atoms")) {
      if (!c.at("atoms").is_object()) throw FormatError("atoms: expected an object");
      for (auto it = c.at("atoms").begin(); it != c.at("atoms").end(); ++it) {
        if (!it.value().is_array()) throw FormatError("atom truth set: expected an array");
        auto& labels = entry.atoms[it.key()];
        for (const auto& v : it.value()) labels.push_back(detail::get_string(v, "atom truth label"));
      }
    }
    d.channels.push_back(std::move(entry));
  }
  if (!j.at("local").is_array()) throw FormatError("local: expected an array");
  for (const auto& l : j.at("local")) {
    require_keys(l, "local entry", {"channel", "pairs"});
    ProtocolDescription::LocalEntry entry;
    entry.channel = detail::get_channel(l.at("channel"), "local channel");
    if (!l.at("pairs").is_array()) throw FormatError("pairs: expected an array");
    for (const auto& pr : l.at("pairs")) {
      if (!pr.is_array() || pr.size() != 2) throw FormatError("pair: expected [\"u\", \"v\"]");
      entry.pairs.emplace_back(detail::get_string(pr[0], "pair source"), detail::get_string(pr[1], "pair target"));
    }
    d.local.push_back(std::move(entry));
  }
  return d;
}

inline nlohmann::json protocol_to_json(const ProtocolDescription& d) {
  nlohmann::json j;
  j["window"] = {d.lo, d.hi};
  j["channels"] = nlohmann::json::array();
  for (const auto& c : d.channels) {
    nlohmann::json entry = {{"index", c.index}, {"values", c.values}};
    if (!c.atoms.empty()) entry["atoms"] = c.atoms;
    j["channels"].push_back(std::move(entry));
  }
  j["local"] = nlohmann::json::array();
  for (const auto& l : d.local) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [u, v] : l.pairs) pairs.push_back({u, v});
    j["local"].push_back({{"channel", l.channel}, {"pairs", std::move(pairs)}});
  }
  return j;
}

inline ProtocolDescription protocol_from_text(const std::string& text) {
  return protocol_from_json(detail::parse_json_text(text));
}

/// Loads and builds a protocol file; malformed content raises FormatError.
inline ChainProtocol load_protocol(const std::string& path) {
  ProtocolDescription d = protocol_from_text(detail::read_file(path));
  try {
    return build_protocol(d);
  } catch (const ProtocolError& e) {
    throw FormatError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Proof scripts

inline Justification rule_from_json(const nlohmann::json& r) {
  using detail::require_keys;
  if (!r.is_object() || !r.contains("type")) throw FormatError("rule: expected an object with a 'type'");
  const std::string type = detail::get_string(r.at("type"), "rule type");
  if (type == "taut") {
    require_keys(r, "taut rule", {"type"});
    return Tautology{};
  }
  if (type == "premise") {
    require_keys(r, "premise rule", {"type"});
    return Premise{};
  }
  if (type == "mp") {
    require_keys(r, "mp rule", {"type", "from", "impl"});
    return ModusPonens{detail::get_id(r.at("from"), "mp from"), detail::get_id(r.at("impl"), "mp impl")};
  }
  if (type == "nec") {
    require_keys(r, "nec rule", {"type", "k", "from"});
    return Necessitation{detail::get_channel(r.at("k"), "nec k"), detail::get_id(r.at("from"), "nec from")};
  }
  if (type == "axiom") {
    if (!r.contains("schema")) throw FormatError("axiom rule: missing key 'schema'");
    AxiomInstance a;
    try {
      a.schema = schema_from_name(detail::get_string(r.at("schema"), "axiom schema"));
    } catch (const UnknownSchema& e) {
      throw FormatError(e.what());
    }
    switch (a.schema) {
      case Schema::Distributivity:
      case Schema::Disjunction:
        require_keys(r, "axiom rule", {"type", "schema", "k", "phi", "psi"});
        a.psi = detail::get_formula(r.at("psi"), "axiom psi");
        break;
      case Schema::Reflexivity:
      case Schema::SelfAwareness:
        require_keys(r, "axiom rule", {"type", "schema", "k", "phi"});
        break;
      case Schema::Gateway:
        require_keys(r, "axiom rule", {"type", "schema", "k", "n", "phi"});
        a.n = detail::get_channel(r.at("n"), "axiom n");
        break;
    }
    a.k = detail::get_channel(r.at("k"), "axiom k");
    a.phi = detail::get_formula(r.at("phi"), "axiom phi");
    return a;
  }
  throw FormatError("unknown rule type '" + type + "'");
}

inline nlohmann::json rule_to_json(const Justification& j) {
  return std::visit(
      [](const auto& rule) -> nlohmann::json {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, Tautology>) {
          return {{"type", "taut"}};
        } else if constexpr (std::is_same_v<R, Premise>) {
          return {{"type", "premise"}};
        } else if constexpr (std::is_same_v<R, ModusPonens>) {
          return {{"type", "mp"}, {"from", rule.from}, {"impl", rule.impl}};
        } else if constexpr (std::is_same_v<R, Necessitation>) {
          return {{"type", "nec"}, {"k", rule.k}, {"from", rule.from}};
        } else {
          nlohmann::json out = {{"type", "axiom"}, {"schema", std::string(schema_name(rule.schema))}, {"k", rule.k}};
          if (rule.schema == Schema::Gateway) out["n"] = rule.n;
          out["phi"] = render(rule.phi);
          if (rule.schema == Schema::Distributivity || rule.schema == Schema::Disjunction) out["psi"] = render(rule.psi);
          return out;
        }
      },
      j);
}

inline ProofScript script_from_json(const nlohmann::json& j) {
  detail::require_keys(j, "script", {"goal", "lines"}, {"premises_allowed"});
  ProofScript s;
  s.goal = detail::get_formula(j.at("goal"), "goal");
  if (j.contains("premises_allowed")) {
    if (!j.at("premises_allowed").is_boolean()) throw FormatError("premises_allowed: expected a boolean");
    s.premises_allowed = j.at("premises_allowed").get<bool>();
  }
  if (!j.at("lines").is_array()) throw FormatError("lines: expected an array");
  for (const auto& l : j.at("lines")) {
    detail::require_keys(l, "line", {"id", "formula", "rule"});
    ProofLine line;
    line.id = detail::get_id(l.at("id"), "line id");
    line.formula = detail::get_formula(l.at("formula"), "line " + std::to_string(line.id) + " formula");
    line.rule = rule_from_json(l.at("rule"));
    s.lines.push_back(std::move(line));
  }
  return s;
}

inline nlohmann::json script_to_json(const ProofScript& s) {
  nlohmann::json j;
  j["goal"] = render(s.goal);
  j["premises_allowed"] = s.premises_allowed;
  j["lines"] = nlohmann::json::array();
  for (const auto& l : s.lines)
    j["lines"].push_back({{"id", l.id}, {"formula", render(l.formula)}, {"rule", rule_to_json(l.rule)}});
  return j;
}

inline ProofScript script_from_text(const std::string& text) { return script_from_json(detail::parse_json_text(text)); }

inline ProofScript load_script(const std::string& path) { return script_from_text(detail::read_file(path)); }

}  // namespace chainlogic
