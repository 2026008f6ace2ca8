#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "agenum/ecs.hpp"
#include "agenum/grammar.hpp"
#include "agenum/spanner.hpp"

namespace agenum {

// A derivation count in N ∪ {∞}.
class Count {
 public:
  Count() = default;
  explicit Count(uint64_t v) : value_(v) {}
  static Count infinite() {
    Count c;
    c.infinite_ = true;
    return c;
  }

  bool is_infinite() const { return infinite_; }
  bool is_zero() const { return !infinite_ && value_ == 0; }
  const boost::multiprecision::cpp_int& value() const { return value_; }

  Count& operator+=(const Count& o);
  friend Count operator*(const Count& a, const Count& b);
  bool operator==(const Count& o) const {
    return infinite_ == o.infinite_ && (infinite_ || value_ == o.value_);
  }
  // Compares against a finite bound.
  bool exceeds(uint64_t bound) const { return infinite_ || value_ > bound; }

  std::string to_string() const;

 private:
  boost::multiprecision::cpp_int value_ = 0;
  bool infinite_ = false;
};

// Brute-force reference semantics. Counts parse trees (equivalently leftmost
// derivations) of the raw grammar, without normalizing it, by dynamic
// programming over substrings; a substring's tables are shared by every
// string containing it.
class Oracle {
 public:
  // Skeletons serialize derivation trees with labels erased: "(" children
  // ")" per nonterminal, "0" per terminal. They determine the sequence of
  // shapes of the leftmost derivation and vice versa.
  using Key = std::pair<Output, std::string>;
  using Table = std::map<Key, Count>;

  explicit Oracle(const AnnotatedGrammar& g, bool track_skeletons = false,
                  size_t max_entries = 30'000'000);
  ~Oracle();

  // Output → number of derivations from the start symbol over w.
  std::map<Output, Count> outputs(std::u32string_view w);
  // Skeletons of all derivations over w, across all outputs. Requires
  // track_skeletons. The marker kInfinite stands for infinitely many.
  std::set<std::string> skeletons(std::u32string_view w);

  const AnnotatedGrammar& grammar() const { return g_; }

  static constexpr const char* kInfinite = "!";

 private:
  struct Impl;
  const AnnotatedGrammar& g_;
  std::unique_ptr<Impl> impl_;
};

Output ann_of(const AnnotatedString& s);
AnnotatedString annotated_string_of(std::u32string_view w, const Output& o);

std::set<Output> brute_outputs(const AnnotatedGrammar& g,
                               std::u32string_view w);
Count count_derivations(const AnnotatedGrammar& g, const AnnotatedString& s);

// Every string over Σ up to length `max_len`, shortest first, then by letter.
std::vector<std::u32string> strings_upto(const std::set<Letter>& alphabet,
                                         size_t max_len,
                                         size_t cap = 2'000'000);

struct UnambiguityVerdict {
  bool unambiguous = true;
  size_t bound = 0;
  std::optional<AnnotatedString> witness;
  Count witness_count;
};

UnambiguityVerdict check_unambiguous_upto(const AnnotatedGrammar& g,
                                          size_t max_len);
// Same, reusing an oracle built without skeleton tracking.
UnambiguityVerdict check_unambiguous_upto(Oracle* oracle, size_t max_len);

struct RigidityVerdict {
  bool rigid = true;
  size_t bound = 0;
  std::optional<std::u32string> witness;
  bool infinite = false;
  std::vector<std::string> shapes_a, shapes_b;
};

RigidityVerdict check_rigid_upto(const AnnotatedGrammar& g, size_t max_len);

// The sequence of sentential-form shapes of the leftmost derivation that a
// skeleton describes.
std::vector<std::string> shape_sequence(std::string_view skeleton);

// Terminal strings (terminals and variable operations) of length ≤ max_len
// derivable from `from` with derivation trees of height ≤ max_depth when
// given. Throws Error(kScaleLimit) past `cap` strings per nonterminal.
std::set<std::vector<Symbol>> bounded_language(
    const AnnotatedGrammar& g, size_t max_len,
    std::optional<size_t> max_depth = std::nullopt,
    std::optional<uint32_t> from = std::nullopt, size_t cap = 200'000);

// {X : ε is derivable from X with trees of height ≤ |V|+1}.
std::vector<bool> brute_nullable(const AnnotatedGrammar& g);

struct MappingVerdict {
  std::set<Mapping> mappings;
  bool functional = true;
  size_t bound = 0;
  std::optional<RefWord> invalid_witness;
};

MappingVerdict brute_mappings(const ExtractionGrammar& h,
                              std::u32string_view d);
// Bounded functionality check: every derivable ref-word of length ≤ max_len
// is valid.
MappingVerdict check_functional_upto(const ExtractionGrammar& h,
                                     size_t max_len);

// Ref-word symbols as letters of a plain grammar (private-use code points).
Letter op_letter(VariableOp op);
AnnotatedGrammar extraction_as_cfg(const ExtractionGrammar& h);

}  // namespace agenum
