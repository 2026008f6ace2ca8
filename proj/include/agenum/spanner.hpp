#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agenum/ecs.hpp"
#include "agenum/grammar.hpp"

namespace agenum {

struct VariableOp {
  uint32_t var = 0;
  bool close = false;  // ⊢x sorts before ⊣x

  auto operator<=>(const VariableOp&) const = default;
};

// Canonical: sorted, no duplicates.
using OpSet = std::vector<VariableOp>;

struct Span {
  uint32_t begin = 1;  // [begin, end⟩, 1-based
  uint32_t end = 1;

  auto operator<=>(const Span&) const = default;
};

using Mapping = std::map<std::string, Span>;

struct RefSymbol {
  bool is_op = false;
  Letter letter = 0;
  VariableOp op;

  auto operator<=>(const RefSymbol&) const = default;
};

using RefWord = std::vector<RefSymbol>;

// Positions grouped as out(η): (position, ops) sorted by position.
using SpanOutput = std::vector<std::pair<uint32_t, OpSet>>;

inline constexpr Letter kDefaultEndMarker = U'#';

// Throws Error(kInvalidRefWord).
Mapping mapping_of_refword(const RefWord& r,
                           const std::vector<std::string>& vars);
SpanOutput encode_out(const Mapping& m, const std::vector<std::string>& vars);
// Throws Error(kMalformedOutput).
Mapping decode_output(const SpanOutput& o,
                      const std::vector<std::string>& vars);

// "{+x,-y}" with variables in declaration order, opens before closes.
std::string opset_name(const OpSet& ops, const std::vector<std::string>& vars);
// Throws Error(kMalformedOutput).
OpSet parse_opset_name(std::string_view name,
                       const std::vector<std::string>& vars);

// Reads an evaluation output of a translated grammar back as op sets.
SpanOutput span_output_of(const AnnotatedGrammar& translated,
                          const Output& o,
                          const std::vector<std::string>& vars);

// The input must be functional. Throws Error(kInvalidArgument) when the end
// marker occurs in Σ.
AnnotatedGrammar translate(const ExtractionGrammar& h,
                           Letter end_marker = kDefaultEndMarker);

std::vector<Mapping> enumerate_mappings(
    const ExtractionGrammar& h, std::u32string_view d,
    std::optional<size_t> limit = std::nullopt,
    Letter end_marker = kDefaultEndMarker);

// {"x":[i,j],...}
std::string mapping_to_json(const Mapping& m);

}  // namespace agenum
