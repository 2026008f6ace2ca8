// agenum: evaluate annotated grammars, pushdown annotators and extraction
// grammars from the command line.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "agenum/enumerator.hpp"
#include "agenum/error.hpp"
#include "agenum/grammar.hpp"
#include "agenum/oracle.hpp"
#include "agenum/pdann.hpp"
#include "agenum/spanner.hpp"
#include "agenum/utf8.hpp"
#include "json.hpp"

using namespace agenum;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitFormat = 1;
constexpr int kExitSemantic = 2;
constexpr int kExitScale = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kSyntax, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << text;
}

bool is_extraction_file(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    size_t i = line.find_first_not_of(" \t");
    if (i != std::string::npos && line.compare(i, 5, "vars:") == 0) return true;
  }
  return false;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kSyntax:
    case ErrorCode::kUndeclaredSymbol:
    case ErrorCode::kDuplicateStart:
      return kExitFormat;
    case ErrorCode::kScaleLimit:
      return kExitScale;
    default:
      return kExitSemantic;
  }
}

// Text from --text, or the file's contents without one trailing newline.
std::u32string input_text(const std::optional<std::string>& text,
                          const std::optional<std::string>& file) {
  if (text) return decode_utf8(*text);
  if (file) {
    std::string s = read_file(*file);
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return decode_utf8(s);
  }
  throw Error(ErrorCode::kInvalidArgument, "one of --text or --input-file is required");
}

struct RunOptions {
  std::string path;
  std::optional<std::string> text, input_file;
  std::optional<size_t> limit;
  std::string stats;
  std::string mode = "grammar";
};

int cmd_run(const RunOptions& o) {
  std::u32string w = input_text(o.text, o.input_file);
  std::string src = read_file(o.path);

  AnnotatedGrammar g;
  ExtractionGrammar h;
  const bool spanner = o.mode == "spanner";
  if (o.mode == "grammar") {
    g = parse_grammar(src);
  } else if (o.mode == "pdann") {
    g = pdann_to_grammar(parse_pdann(src));
  } else {
    h = parse_extraction_grammar(src);
    if (w.find(kDefaultEndMarker) != std::u32string::npos)
      throw Error(ErrorCode::kInvalidArgument, "document contains the end marker");
    g = translate(h);
    w.push_back(kDefaultEndMarker);
  }

  Evaluation ev(g, w);
  std::vector<uint64_t> delays;
  uint64_t last = ev.enumeration_steps();
  Output out;
  std::string buffer;
  while ((!o.limit || delays.size() < *o.limit) && ev.next(&out)) {
    uint64_t now = ev.enumeration_steps();
    delays.push_back(now - last);
    last = now;
    if (spanner)
      buffer += mapping_to_json(
          decode_output(span_output_of(g, out, h.variables), h.variables));
    else
      buffer += output_to_json(g, out);
    buffer += '\n';
    if (buffer.size() > (1 << 16)) {
      std::cout << buffer;
      buffer.clear();
    }
  }
  std::cout << buffer << std::flush;

  if (!o.stats.empty()) {
    json s;
    s["preprocessMs"] = ev.preprocess_ms();
    s["counters"] = json::parse(counters_report(ev.counters()));
    s["outputs"] = delays.size();
    json d;
    if (!delays.empty()) {
      std::vector<uint64_t> sorted = delays;
      std::sort(sorted.begin(), sorted.end());
      d["min"] = sorted.front();
      d["median"] = sorted[sorted.size() / 2];
      d["max"] = sorted.back();
    } else {
      d["min"] = d["median"] = d["max"] = 0;
    }
    s["delaySteps"] = d;
    s["ecsNodes"] = ev.store().node_count();
    write_output(o.stats, s.dump(2) + "\n");
  }
  return 0;
}

int cmd_normalize(const std::string& path, const std::string& out) {
  write_output(out, render_grammar(to_2nf(parse_grammar(read_file(path))).base));
  return 0;
}

int cmd_translate(const std::string& path, const std::string& out) {
  write_output(out, render_grammar(translate(parse_extraction_grammar(read_file(path)))));
  return 0;
}

int cmd_profile(const std::string& path, const std::string& text) {
  ProfileResult r = compute_profile(parse_pdann(read_file(path)), decode_utf8(text));
  json j;
  j["profile"] = r.profile;
  j["steps"] = r.steps;
  j["budget"] = r.budget;
  std::cout << j.dump() << "\n";
  return 0;
}

std::string refword_text(const RefWord& r, const std::vector<std::string>& vars) {
  std::string s;
  for (const RefSymbol& x : r) {
    if (!s.empty()) s += ' ';
    if (x.is_op) s += (x.op.close ? "-" : "+") + vars.at(x.op.var);
    else s += render_literal(x.letter);
  }
  return s;
}

json unambiguity_report(const AnnotatedGrammar& g, size_t bound) {
  UnambiguityVerdict v = check_unambiguous_upto(g, bound);
  json j;
  j["verdict"] = v.unambiguous;
  j["bound"] = bound;
  if (v.witness) {
    j["witness"] = render_annotated_string(g, *v.witness);
    j["derivations"] = v.witness_count.to_string();
  }
  return j;
}

json rigidity_report(const AnnotatedGrammar& g, size_t bound) {
  RigidityVerdict v = check_rigid_upto(g, bound);
  json j;
  j["verdict"] = v.rigid;
  j["bound"] = bound;
  if (v.witness) {
    j["witness"] = encode_utf8(*v.witness);
    if (v.infinite) j["infiniteDerivations"] = true;
    else j["shapes"] = {v.shapes_a, v.shapes_b};
  }
  return j;
}

struct VerifyOptions {
  std::string path;
  std::optional<std::string> input;
  size_t max_len = 4;
  std::vector<std::string> checks;
};

int cmd_verify(const VerifyOptions& o) {
  std::string src = read_file(o.path);
  const bool extraction = is_extraction_file(src);
  json report;
  report["bound"] = o.max_len;
  json checks = json::object();

  std::vector<std::u32string> inputs;
  if (o.input) inputs.push_back(decode_utf8(*o.input));

  if (extraction) {
    ExtractionGrammar h = parse_extraction_grammar(src);
    AnnotatedGrammar as_cfg = extraction_as_cfg(h);
    if (!o.input) inputs = strings_upto(h.cfg.alphabet, o.max_len);
    for (const std::string& c : o.checks) {
      if (c == "equiv") {
        json j;
        j["verdict"] = true;
        j["checked"] = inputs.size();
        for (const auto& d : inputs) {
          std::vector<Mapping> got = enumerate_mappings(h, d);
          std::set<Mapping> got_set(got.begin(), got.end());
          if (got_set.size() != got.size() || got_set != brute_mappings(h, d).mappings) {
            j["verdict"] = false;
            j["witness"] = encode_utf8(d);
            break;
          }
        }
        checks["equiv"] = j;
      } else if (c == "unambiguous") {
        checks["unambiguous"] = unambiguity_report(as_cfg, o.max_len);
      } else if (c == "rigid") {
        checks["rigid"] = rigidity_report(as_cfg, o.max_len);
      } else if (c == "functional") {
        MappingVerdict v = check_functional_upto(h, o.max_len);
        json j;
        j["verdict"] = v.functional;
        j["bound"] = o.max_len;
        if (v.invalid_witness) j["witness"] = refword_text(*v.invalid_witness, h.variables);
        j["disclaimer"] = "only derivable ref-words of length at most " +
                          std::to_string(o.max_len) + " were examined";
        checks["functional"] = j;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown check " + c);
      }
    }
  } else {
    AnnotatedGrammar g = parse_grammar(src);
    if (!o.input) inputs = strings_upto(g.alphabet, o.max_len);
    for (const std::string& c : o.checks) {
      if (c == "equiv") {
        json j;
        j["verdict"] = true;
        j["checked"] = inputs.size();
        Grammar2NF g2 = to_2nf(g);
        for (const auto& w : inputs) {
          std::vector<Output> got;
          Evaluation ev(g2, w);
          Output out;
          while (ev.next(&out)) got.push_back(out);
          std::set<Output> got_set(got.begin(), got.end());
          if (got_set.size() != got.size() || got_set != brute_outputs(g, w)) {
            j["verdict"] = false;
            j["witness"] = encode_utf8(w);
            break;
          }
        }
        checks["equiv"] = j;
      } else if (c == "unambiguous") {
        checks["unambiguous"] = unambiguity_report(g, o.max_len);
      } else if (c == "rigid") {
        checks["rigid"] = rigidity_report(g, o.max_len);
      } else if (c == "functional") {
        json j;
        j["verdict"] = nullptr;
        j["bound"] = o.max_len;
        j["disclaimer"] = "functionality applies to extraction grammars only";
        checks["functional"] = j;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown check " + c);
      }
    }
  }
  report["checks"] = checks;
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enumerate the outputs of annotated grammars"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Evaluate over an input and stream outputs as JSONL");
  run_cmd->add_option("grammar", run.path, "Grammar, PDAnn or extraction grammar file")->required();
  auto* text_opt = run_cmd->add_option("--text", run.text, "Input string");
  run_cmd->add_option("--input-file", run.input_file, "Read the input string from a file")
      ->excludes(text_opt);
  run_cmd->add_option("--limit", run.limit, "Stop after this many outputs");
  run_cmd->add_option("--stats", run.stats, "Write run statistics as JSON to this path");
  run_cmd->add_option("--mode", run.mode, "Input model")
      ->check(CLI::IsMember({"grammar", "pdann", "spanner"}));

  std::string norm_path, norm_out;
  auto* norm_cmd = app.add_subcommand("normalize", "Print the arity-two normal form");
  norm_cmd->add_option("grammar", norm_path)->required();
  norm_cmd->add_option("--out", norm_out, "Output path (default stdout)");

  std::string tr_path, tr_out;
  auto* tr_cmd = app.add_subcommand("translate", "Translate an extraction grammar");
  tr_cmd->add_option("grammar", tr_path)->required();
  tr_cmd->add_option("--out", tr_out, "Output path (default stdout)");

  std::string pf_path, pf_text;
  auto* pf_cmd = app.add_subcommand("profile", "Stack-height profile of the accepting run");
  pf_cmd->add_option("pdann", pf_path)->required();
  pf_cmd->add_option("--text", pf_text, "Input string")->required();

  VerifyOptions verify;
  auto* vf_cmd = app.add_subcommand("verify", "Bounded brute-force checks");
  vf_cmd->add_option("grammar", verify.path)->required();
  vf_cmd->add_option("checks", verify.checks, "equiv, unambiguous, rigid, functional")
      ->check(CLI::IsMember({"equiv", "unambiguous", "rigid", "functional"}));
  vf_cmd->add_option("--input", verify.input, "Check this input only (equiv)");
  vf_cmd->add_option("--max-len", verify.max_len, "Length bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitFormat;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*norm_cmd) return cmd_normalize(norm_path, norm_out);
    if (*tr_cmd) return cmd_translate(tr_path, tr_out);
    if (*pf_cmd) return cmd_profile(pf_path, pf_text);
    if (*vf_cmd) {
      if (verify.checks.empty()) verify.checks = {"equiv", "unambiguous", "rigid"};
      return cmd_verify(verify);
    }
  } catch (const Error& e) {
    std::cerr << "agenum: " << error_name(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return 0;
}
