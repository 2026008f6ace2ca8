#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agenum {

using Letter = char32_t;

inline constexpr uint32_t kNoAnnotation = UINT32_MAX;

struct Terminal {
  Letter letter = 0;
  uint32_t annotation = kNoAnnotation;

  bool annotated() const { return annotation != kNoAnnotation; }
  auto operator<=>(const Terminal&) const = default;
};

// Annotated strings are sequences of terminals over Σ ∪ (Σ×Ω).
using AnnotatedString = std::vector<Terminal>;

struct Symbol {
  enum class Kind : uint8_t { kNonterminal, kTerminal, kOpen, kClose };

  Kind kind = Kind::kNonterminal;
  // Nonterminal id, or variable index for kOpen / kClose.
  uint32_t id = 0;
  Terminal terminal;

  static Symbol nonterminal(uint32_t id) {
    return {Kind::kNonterminal, id, {}};
  }
  static Symbol term(Letter a, uint32_t annotation = kNoAnnotation) {
    return {Kind::kTerminal, 0, {a, annotation}};
  }
  static Symbol open(uint32_t var) { return {Kind::kOpen, var, {}}; }
  static Symbol close(uint32_t var) { return {Kind::kClose, var, {}}; }

  bool is_nonterminal() const { return kind == Kind::kNonterminal; }
  bool is_terminal() const { return kind == Kind::kTerminal; }
  bool is_op() const { return kind == Kind::kOpen || kind == Kind::kClose; }

  auto operator<=>(const Symbol&) const = default;
};

struct Rule {
  uint32_t lhs = 0;
  std::vector<Symbol> rhs;

  auto operator<=>(const Rule&) const = default;
};

struct AnnotatedGrammar {
  std::vector<std::string> nonterminals;
  std::vector<std::string> annotations;
  std::set<Letter> alphabet;
  std::vector<Rule> rules;
  uint32_t start = 0;

  size_t size() const;  // |G|: sum over rules of 1 + |rhs|

  // Returns the existing id when the name is already present.
  uint32_t intern_nonterminal(std::string_view name);
  uint32_t intern_annotation(std::string_view name);
  int find_nonterminal(std::string_view name) const;
  int find_annotation(std::string_view name) const;

  void add_rule(uint32_t lhs, std::vector<Symbol> rhs);
  std::vector<std::vector<uint32_t>> rules_by_lhs() const;
};

// Extraction grammars reuse the rule representation with kOpen / kClose
// symbols; variables index into `variables`.
struct ExtractionGrammar {
  AnnotatedGrammar cfg;
  std::vector<std::string> variables;
};

struct UnitTable {
  // d[z] lists x once per rule justifying x ∈ D[z].
  std::vector<std::vector<uint32_t>> d;
  std::vector<uint32_t> topo_order;
  // crule[z] holds indices of rules x -> y z.
  std::vector<std::vector<uint32_t>> crule;
};

struct Grammar2NF {
  AnnotatedGrammar base;
  std::vector<bool> nullable;
  UnitTable units;
};

AnnotatedGrammar parse_grammar(std::string_view text);
ExtractionGrammar parse_extraction_grammar(std::string_view text);

std::string render_grammar(const AnnotatedGrammar& g);
std::string render_extraction_grammar(const ExtractionGrammar& h);
// 'a' with the escapes the parser understands.
std::string render_literal(Letter a);
std::string render_terminal(const AnnotatedGrammar& g, const Terminal& t);
std::string render_annotated_string(const AnnotatedGrammar& g,
                                    const AnnotatedString& s);

std::vector<bool> compute_nullable(const AnnotatedGrammar& g);
AnnotatedGrammar trim_useless(const AnnotatedGrammar& g);

// Chains right-hand sides longer than two and lifts terminals (and variable
// operations) out of length-2 right-hand sides into fresh nonterminals.
AnnotatedGrammar binarize(const AnnotatedGrammar& g);

// Throws Error(kUnitCycle).
UnitTable build_unit_table(const AnnotatedGrammar& g2,
                           const std::vector<bool>& nullable);
Grammar2NF to_2nf(const AnnotatedGrammar& g);

bool is_2nf(const AnnotatedGrammar& g);

// 1 for nonterminals, 0 for terminals.
std::string shape_of(std::span<const Symbol> form);

std::u32string str_of(const AnnotatedString& s);

}  // namespace agenum
