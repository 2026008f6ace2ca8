#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "agenum/ecs.hpp"
#include "agenum/grammar.hpp"

namespace agenum {

struct Transition {
  enum class Kind : uint8_t { kRead, kReadWrite, kPush, kPop };

  Kind kind = Kind::kRead;
  uint32_t from = 0;
  uint32_t to = 0;
  Letter letter = 0;                    // reads
  uint32_t annotation = kNoAnnotation;  // read-writes
  uint32_t stack = 0;                   // pushes and pops

  auto operator<=>(const Transition&) const = default;
};

struct PDAnn {
  std::vector<std::string> states;
  std::vector<std::string> stack_symbols;
  std::vector<std::string> annotations;
  std::set<Letter> alphabet;
  std::vector<Transition> transitions;
  uint32_t initial = 0;
  std::set<uint32_t> finals;

  uint32_t intern_state(std::string_view name);
  uint32_t intern_stack_symbol(std::string_view name);
  uint32_t intern_annotation(std::string_view name);
  void add(const Transition& t);
};

// Stack heights of every configuration of a run, starting at 0.
using Profile = std::vector<uint32_t>;

PDAnn parse_pdann(std::string_view text);
std::string render_pdann(const PDAnn& p);

// States q0, qf and r<rule>_<i>; q0 pushes the stack symbol qf and enters a
// start rule, which pops it into the final state qf.
PDAnn grammar_to_pdann(const AnnotatedGrammar& g);

// Triple construction over the bottom-marked automaton. Only productive,
// reachable triples become nonterminals.
AnnotatedGrammar pdann_to_grammar(const PDAnn& p);

// Lazy subset construction from {(q0,q0)}. Throws Error(kSizeLimit) past
// `max_states` states.
PDAnn det_modulo_profile(const PDAnn& p, size_t max_states = 20000);

// At most one push per state, one pop per (state, γ), one read per
// (state, a) and one read-write per (state, a, annotation).
bool is_deterministic_modulo_profile(const PDAnn& p);

PDAnn strip_annotations(const PDAnn& p);

// Keeps the states reachable from the initial state that can also reach a
// final state in the transition graph.
PDAnn trim_states(const PDAnn& p);

// Requires no read-write transitions. Every state either only reads (one
// transition per letter), has exactly one push, or only pops (one
// transition per stack symbol).
bool check_deterministic(const PDAnn& p);

struct ProfileResult {
  Profile profile;
  uint64_t steps = 0;
  uint64_t budget = 0;
  size_t det_states = 0;
};

// Throws Error(kNotProfiledDeterministic), Error(kNoRun) or
// Error(kStepBudget).
ProfileResult compute_profile(const PDAnn& p, std::u32string_view w,
                              uint64_t budget_factor = 4);

struct RunRecord {
  std::vector<uint32_t> transitions;
  Output output;
  Profile profile;
};

// All accepting runs of length ≤ depth_cap (default 4·(|w|+1)·|Q|).
std::vector<RunRecord> brute_runs(const PDAnn& p, std::u32string_view w,
                                  std::optional<size_t> depth_cap = std::nullopt);

std::set<Output> pdann_outputs(const PDAnn& p, std::u32string_view w);

AnnotatedGrammar disambiguate_rigid(const AnnotatedGrammar& g);

std::vector<Output> enumerate_pdann(const PDAnn& p, std::u32string_view w,
                                    std::optional<size_t> limit = std::nullopt);

}  // namespace agenum
