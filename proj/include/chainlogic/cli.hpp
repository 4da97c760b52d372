#pragma once

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chainlogic/corpus.hpp"
#include "chainlogic/formula.hpp"
#include "chainlogic/json_io.hpp"
#include "chainlogic/proofcheck.hpp"
#include "chainlogic/protocol.hpp"
#include "chainlogic/search.hpp"
#include "chainlogic/semantics.hpp"
#include "chainlogic/skeleton.hpp"
#include "chainlogic/telephone.hpp"

namespace chainlogic {

/// Exit codes: established, refuted, usage/format error.
enum ExitCode : int { kExitHolds = 0, kExitRefuted = 1, kExitError = 2 };

namespace detail {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> split_run(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Joins the lines of a multi-line message with "; ".
inline std::string one_line(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(' ');
    if (first == std::string::npos) continue;
    if (!out.empty()) out += out.back() == ':' ? " " : "; ";
    out += line.substr(first);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

struct Output {
  std::ostream& out;
  bool as_json;
  json report = json::object();

  void line(const std::string& text) {
    if (!as_json) out << text << '\n';
  }
  int finish(int code) {
    if (as_json) out << report.dump() << '\n';
    return code;
  }
};

/// eval/valid/counterexample against an already built protocol.
inline int eval_command(Output& o, EvalContext& ctx, const std::string& run_text, const Formula& f) {
  const ChainProtocol& p = ctx.protocol();
  if (run_text.empty()) throw UsageError("--run is required");
  Run r = p.make_run(split_run(run_text));
  if (!p.is_run(r)) throw UsageError("'" + run_text + "' is not a run of the protocol");
  const bool value = eval(ctx, r, f);
  o.report["command"] = "eval";
  o.report["verdict"] = value ? "true" : "false";
  o.report["value"] = value;
  o.line(value ? "true" : "false");
  if (!value && f.is_box()) {
    if (auto w = box_counterexample(ctx, r, f)) {
      o.report["witness"] = p.labels(*w);
      o.line("witness: " + join(p.labels(*w)));
    }
  }
  return o.finish(value ? kExitHolds : kExitRefuted);
}

inline int valid_command(Output& o, EvalContext& ctx, const Formula& f) {
  const ChainProtocol& p = ctx.protocol();
  auto cx = counterexample(ctx, f);
  o.report["command"] = "valid";
  o.report["verdict"] = cx ? "invalid" : "valid";
  o.line(cx ? "invalid" : "valid");
  if (cx) {
    o.report["counterexample"] = p.labels(*cx);
    o.line("counterexample: " + join(p.labels(*cx)));
  }
  return o.finish(cx ? kExitRefuted : kExitHolds);
}

inline int counterexample_command(Output& o, EvalContext& ctx, const std::string& run_text, const Formula& f) {
  const ChainProtocol& p = ctx.protocol();
  std::optional<Run> cx;
  if (run_text.empty()) {
    cx = counterexample(ctx, f);
  } else {
    if (!f.is_box()) throw UsageError("with --run the formula must be a box [k]phi");
    Run r = p.make_run(split_run(run_text));
    if (!p.is_run(r)) throw UsageError("'" + run_text + "' is not a run of the protocol");
    cx = box_counterexample(ctx, r, f);
  }
  o.report["command"] = "counterexample";
  o.report["verdict"] = cx ? "found" : "none";
  if (cx) {
    o.report["run"] = p.labels(*cx);
    o.line(join(p.labels(*cx)));
  } else {
    o.line("none");
  }
  return o.finish(cx ? kExitRefuted : kExitHolds);
}

}  // namespace detail

/// Runs the command line (args excludes the program name). Returns the exit
/// code; reports go to out, errors to err.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using detail::json;
  CLI::App app{"Epistemic logic toolkit for communication chains", "chainlogic"};
  app.require_subcommand(1);

  bool as_json = false;
  bool strict_window = false;
  app.add_flag("--json", as_json, "Print a single JSON object");
  app.add_flag("--strict-window", strict_window, "Reject boxes over channels outside the protocol window");

  std::string formula_text, protocol_path, run_text, script_path;

  auto* scope_cmd = app.add_subcommand("scope", "Print the least channel set A with the formula in Phi(A)");
  std::string positional_formula;
  scope_cmd->add_option("formula_text", positional_formula, "Formula");
  scope_cmd->add_option("--formula", formula_text, "Formula");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a formula at a run of a protocol file");
  eval_cmd->add_option("--protocol", protocol_path, "Protocol JSON file")->required();
  eval_cmd->add_option("--run", run_text, "Comma-separated values, one per window channel")->required();
  eval_cmd->add_option("--formula", formula_text, "Formula")->required();

  auto* valid_cmd = app.add_subcommand("valid", "Check a formula at every run of a protocol file");
  valid_cmd->add_option("--protocol", protocol_path, "Protocol JSON file")->required();
  valid_cmd->add_option("--formula", formula_text, "Formula")->required();

  auto* prove_cmd = app.add_subcommand("prove", "Check a proof script");
  prove_cmd->add_option("--script", script_path, "Proof script JSON file")->required();

  auto* corpus_cmd = app.add_subcommand("corpus", "List the bundled proof scripts, or print one as JSON");
  std::string corpus_name;
  corpus_cmd->add_option("name", corpus_name, "Script name");

  std::size_t channels = 3, max_values = 2, atoms = 1, samples = 0, threads = 1;
  std::uint64_t seed = 0, budget = 100000;
  auto* falsify_cmd = app.add_subcommand("falsify", "Search small protocols for a countermodel");
  falsify_cmd->add_option("--formula", formula_text, "Formula")->required();
  falsify_cmd->add_option("--channels", channels, "Window width")->check(CLI::PositiveNumber);
  falsify_cmd->add_option("--max-values", max_values, "Largest value set")->check(CLI::Range(1, 7));
  falsify_cmd->add_option("--atoms", atoms, "Atoms per channel (p, q, ...)");
  auto* seed_opt = falsify_cmd->add_option("--seed", seed, "Seed for random sampling");
  auto* samples_opt = falsify_cmd->add_option("--samples", samples, "Sample this many random protocols")
                          ->check(CLI::PositiveNumber);
  falsify_cmd->add_option("--budget", budget, "Scan at most this many protocols")->check(CLI::PositiveNumber);
  falsify_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::size_t word_len = 4, chain_len = 3;
  std::string alphabet = "latin";
  auto* tel_cmd = app.add_subcommand("telephone", "Telephone game protocol: eval, valid, counterexample, count");
  tel_cmd->add_option("--len", word_len, "Word length")->check(CLI::PositiveNumber);
  tel_cmd->add_option("--alphabet", alphabet, "'latin' or the letters to use");
  tel_cmd->add_option("--chain", chain_len, "Number of channels")->check(CLI::Range(2, 1000000));
  tel_cmd->require_subcommand(1);
  auto* tel_eval = tel_cmd->add_subcommand("eval", "Evaluate at a run");
  tel_eval->add_option("--run", run_text, "Comma-separated words")->required();
  tel_eval->add_option("--formula", formula_text, "Formula")->required();
  auto* tel_valid = tel_cmd->add_subcommand("valid", "Check at every run");
  tel_valid->add_option("--formula", formula_text, "Formula")->required();
  auto* tel_cx = tel_cmd->add_subcommand("counterexample", "First falsifying run (for [k]phi at --run: first indistinguishable run falsifying phi)");
  tel_cx->add_option("--formula", formula_text, "Formula")->required();
  tel_cx->add_option("--run", run_text, "Comma-separated words");
  auto* tel_count = tel_cmd->add_subcommand("count", "Number of runs");

  for (CLI::App* sub : {scope_cmd, corpus_cmd, eval_cmd, valid_cmd, prove_cmd, falsify_cmd, tel_cmd, tel_eval, tel_valid, tel_cx, tel_count})
    sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitHolds;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitHolds;
  } catch (const CLI::ParseError& e) {
    err << "error: " << detail::one_line(e.what()) << '\n';
    return kExitError;
  }

  detail::Output o{out, as_json};
  EvalOptions eval_options;
  eval_options.strict_window = strict_window;

  try {
    if (*scope_cmd) {
      std::string text = !formula_text.empty() ? formula_text : positional_formula;
      if (text.empty()) throw detail::UsageError("a formula is required");
      Scope s = scope(parse(text));
      o.report["command"] = "scope";
      o.report["verdict"] = s.to_string();
      o.report["scope"] = s.indices();
      o.line(s.to_string());
      return o.finish(kExitHolds);
    }
    if (*corpus_cmd) {
      const auto all = corpus();
      if (corpus_name.empty()) {
        for (const auto& s : all) out << s.name << "  " << s.description << '\n';
        return kExitHolds;
      }
      out << script_to_json(corpus_script(all, corpus_name).script).dump(2) << '\n';
      return kExitHolds;
    }
    if (*eval_cmd) {
      Formula f = parse(formula_text);
      EvalContext ctx(load_protocol(protocol_path), eval_options);
      return detail::eval_command(o, ctx, run_text, f);
    }
    if (*valid_cmd) {
      Formula f = parse(formula_text);
      EvalContext ctx(load_protocol(protocol_path), eval_options);
      return detail::valid_command(o, ctx, f);
    }
    if (*prove_cmd) {
      ProofScript s = load_script(script_path);
      Verdict v = check_script(s);
      o.report["command"] = "prove";
      o.report["verdict"] = v.accepted ? "accepted" : "rejected";
      if (v.failing_line) o.report["failing_line"] = *v.failing_line;
      if (!v.accepted) o.report["reason"] = v.reason;
      json lines = json::array();
      for (const auto& d : v.lines) {
        const char* status = d.status == LineDiagnostic::Status::Ok ? "ok" : d.status == LineDiagnostic::Status::Failed ? "failed" : "skipped";
        json entry = {{"id", d.id}, {"status", status}, {"tainted", d.tainted}};
        if (!d.message.empty()) entry["message"] = d.message;
        lines.push_back(std::move(entry));
      }
      o.report["lines"] = std::move(lines);
      if (v.accepted) {
        o.line("accepted");
      } else if (v.failing_line) {
        o.line("rejected at line " + std::to_string(*v.failing_line) + ": " + v.reason);
      } else {
        o.line("rejected: " + v.reason);
      }
      return o.finish(v.accepted ? kExitHolds : kExitRefuted);
    }
    if (*falsify_cmd) {
      Formula f = parse(formula_text);
      SearchBounds b;
      b.num_channels = channels;
      b.max_values = max_values;
      b.atoms_per_channel = atoms;
      if (samples_opt->count() > 0) {
        b.mode = RandomSampling{seed, samples};
      } else if (seed_opt->count() > 0) {
        throw detail::UsageError("--seed requires --samples");
      }
      FalsifyOptions fo;
      fo.threads = threads;
      FalsifyResult r = falsify(f, b, budget, fo);
      o.report["command"] = "falsify";
      o.report["protocols_scanned"] = r.protocols_scanned;
      if (r.witness) {
        const auto& w = *r.witness;
        json protocol = protocol_to_json(describe(w.protocol));
        o.report["verdict"] = "countermodel";
        o.report["protocol"] = protocol;
        o.report["run"] = w.protocol.labels(w.run);
        o.line("countermodel found (protocol #" + std::to_string(w.protocol_index + 1) + " scanned)");
        o.line("protocol: " + protocol.dump());
        o.line("run: " + detail::join(w.protocol.labels(w.run)));
        return o.finish(kExitRefuted);
      }
      o.report["verdict"] = "none";
      o.report["exhausted"] = r.exhausted;
      o.line("none: no countermodel within the bounds after scanning " + std::to_string(r.protocols_scanned) +
             " protocol(s)" + (r.exhausted ? " (bounded space exhausted)" : " (budget reached)") +
             "; this is not a proof of validity");
      return o.finish(kExitHolds);
    }
    if (*tel_cmd) {
      std::string letters = alphabet == "latin" ? latin_alphabet() : alphabet;
      ChainProtocol p = telephone(word_len, letters, chain_len);
      if (*tel_count) {
        std::uint64_t n = run_count(p);
        o.report["command"] = "count";
        o.report["verdict"] = std::to_string(n);
        o.report["runs"] = n;
        o.line(std::to_string(n));
        return o.finish(kExitHolds);
      }
      Formula f = parse(formula_text);
      EvalContext ctx(std::move(p), eval_options);
      if (*tel_eval) return detail::eval_command(o, ctx, run_text, f);
      if (*tel_valid) return detail::valid_command(o, ctx, f);
      return detail::counterexample_command(o, ctx, run_text, f);
    }
  } catch (const std::exception& e) {
    err << "error: " << detail::one_line(e.what()) << '\n';
    return kExitError;
  }
  err << "error: no subcommand\n";
  return kExitError;
}

}  // namespace chainlogic
