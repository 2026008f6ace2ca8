#include "test_support.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "agenum/error.hpp"
#include "agenum/utf8.hpp"

namespace agenum::testing {

std::string data_path(const std::string& rel) {
  return std::string(AGENUM_TEST_DATA) + "/" + rel;
}

std::string read_data(const std::string& rel) {
  std::ifstream in(data_path(rel), std::ios::binary);
  if (!in) throw std::runtime_error("missing test data " + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AnnotatedGrammar load_grammar(const std::string& rel) {
  return parse_grammar(read_data(rel));
}

ExtractionGrammar load_extraction(const std::string& rel) {
  return parse_extraction_grammar(read_data(rel));
}

PDAnn load_pdann(const std::string& rel) { return parse_pdann(read_data(rel)); }

std::vector<std::string> data_files(const std::string& dir,
                                    const std::string& suffix) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(data_path(dir))) {
    std::string name = e.path().filename().string();
    if (name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(dir + "/" + name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::u32string u32(const std::string& s) { return decode_utf8(s); }

std::vector<Output> enumerate_all(const AnnotatedGrammar& g,
                                  std::u32string_view w) {
  return evaluate(g, w);
}

std::string describe(const AnnotatedGrammar& g, const Output& o) {
  return output_to_json(g, o);
}

std::string describe(const AnnotatedGrammar& g, const std::set<Output>& os) {
  std::string s = "{";
  for (const Output& o : os) {
    if (s.size() > 1) s += ", ";
    s += describe(g, o);
  }
  return s + "}";
}

std::set<NamedOutput> named(const std::vector<std::string>& annotations,
                            const std::set<Output>& os) {
  std::set<NamedOutput> out;
  for (const Output& o : os) {
    NamedOutput n;
    for (const OutputLetter& l : o) n.emplace_back(l.position, annotations.at(l.annotation));
    out.insert(std::move(n));
  }
  return out;
}

AnnotatedGrammar random_grammar(std::mt19937_64& rng,
                                const RandomGrammarParams& params) {
  auto pick = [&](size_t lo, size_t hi) {
    return std::uniform_int_distribution<size_t>(lo, hi)(rng);
  };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  static const char* kNames[] = {"S", "A", "B", "C", "D", "E", "F", "G"};
  static const char32_t kLetters[] = {U'a', U'b', U'c', U'd'};
  static const char* kAnns[] = {"x", "y", "z"};

  AnnotatedGrammar g;
  const size_t nt = pick(1, params.max_nonterminals);
  const size_t letters = pick(1, params.max_letters);
  const size_t anns = pick(0, params.max_annotations);
  for (size_t i = 0; i < nt; ++i) g.intern_nonterminal(kNames[i]);
  for (size_t i = 0; i < anns; ++i) g.intern_annotation(kAnns[i]);
  g.start = 0;
  const size_t rules = pick(std::min(nt, params.max_rules), params.max_rules);
  for (size_t r = 0; r < rules; ++r) {
    uint32_t lhs = r < nt ? r : pick(0, nt - 1);
    size_t len = chance(0.12) ? 0 : pick(1, params.max_rhs);
    std::vector<Symbol> rhs;
    for (size_t i = 0; i < len; ++i) {
      if (chance(0.4)) {
        rhs.push_back(Symbol::nonterminal(pick(0, nt - 1)));
      } else {
        Letter a = kLetters[pick(0, letters - 1)];
        uint32_t ann = anns > 0 && chance(0.4) ? pick(0, anns - 1) : kNoAnnotation;
        rhs.push_back(Symbol::term(a, ann));
      }
    }
    g.add_rule(lhs, std::move(rhs));
  }
  return g;
}

std::vector<AnnotatedGrammar> unambiguous_corpus(size_t count, uint64_t seed,
                                                 size_t bound) {
  std::mt19937_64 rng(seed);
  std::vector<AnnotatedGrammar> out;
  while (out.size() < count) {
    AnnotatedGrammar g = random_grammar(rng);
    try {
      to_2nf(g);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUnitCycle) continue;
      throw;
    }
    Oracle oracle(g);
    bool nonempty = false;
    for (const auto& w : strings_upto(g.alphabet, bound)) {
      if (!w.empty() && !oracle.outputs(w).empty()) {
        nonempty = true;
        break;
      }
    }
    if (!nonempty) continue;
    if (!check_unambiguous_upto(&oracle, bound).unambiguous) continue;
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<AnnotatedGrammar> duplicated_rigid_corpus() {
  static const char* kBases[] = {
      "S -> 'a'",
      "S -> 'a'@x S | 'a' S | _",
      "S -> '('@m S ')' S | '(' S ')' S | _",
      "S -> 'a' S 'b' | _",
      "S -> A B\nA -> 'a'@x | 'a'\nB -> 'b'@y | 'b'",
      "S -> 'a'@x S | 'a'@y S | 'a' S | _",
      "S -> '(' S ')' S | _",
      "S -> 'a' S | 'b' S | _",
      "S -> A S | _\nA -> 'a'@x | 'b'",
      "S -> 'a' B\nB -> 'b' B | 'c'@z",
  };
  std::vector<AnnotatedGrammar> out;
  for (const char* base : kBases) {
    AnnotatedGrammar g = parse_grammar(std::string("start: S\n") + base);
    AnnotatedGrammar first = g;
    first.rules.insert(first.rules.begin() + 1, g.rules[0]);
    out.push_back(first);
    // Single-rule bases get a third copy instead.
    AnnotatedGrammar last = g.rules.size() == 1 ? first : g;
    last.rules.push_back(g.rules.back());
    out.push_back(std::move(last));
  }
  return out;
}

std::vector<std::u32string> balanced_strings(size_t max_len) {
  std::vector<std::u32string> out;
  for (const auto& w : strings_upto({U'(', U')'}, max_len)) {
    int depth = 0;
    bool ok = true;
    for (char32_t c : w) {
      depth += c == U'(' ? 1 : -1;
      if (depth < 0) ok = false;
    }
    if (ok && depth == 0) out.push_back(w);
  }
  return out;
}

}  // namespace agenum::testing
