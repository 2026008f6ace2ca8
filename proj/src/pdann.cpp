#include "agenum/pdann.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "agenum/enumerator.hpp"
#include "agenum/error.hpp"
#include "agenum/utf8.hpp"

namespace agenum {

namespace {

uint32_t intern(std::vector<std::string>* names, std::string_view name) {
  auto it = std::find(names->begin(), names->end(), name);
  if (it != names->end()) return it - names->begin();
  names->emplace_back(name);
  return names->size() - 1;
}

}  // namespace

uint32_t PDAnn::intern_state(std::string_view name) {
  return intern(&states, name);
}
uint32_t PDAnn::intern_stack_symbol(std::string_view name) {
  return intern(&stack_symbols, name);
}
uint32_t PDAnn::intern_annotation(std::string_view name) {
  return intern(&annotations, name);
}

void PDAnn::add(const Transition& t) {
  if (t.kind == Transition::Kind::kRead || t.kind == Transition::Kind::kReadWrite)
    alphabet.insert(t.letter);
  transitions.push_back(t);
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct PToken {
  enum Kind { kWord, kLiteral };
  Kind kind;
  std::string text;
  Letter letter = 0;
};

bool word_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '%';
}

[[noreturn]] void pdann_error(size_t line, const std::string& what) {
  throw Error(ErrorCode::kSyntax, "line " + std::to_string(line) + ": " + what);
}

std::vector<PToken> scan(std::string_view s, size_t line) {
  std::vector<PToken> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '#') {
      break;
    } else if (c == '\'') {
      std::string raw;
      size_t j = i + 1;
      bool closed = false;
      while (j < s.size()) {
        if (s[j] == '\\' && j + 1 < s.size()) {
          char e = s[j + 1];
          if (e == '\'' || e == '\\') raw.push_back(e);
          else if (e == 'n') raw.push_back('\n');
          else if (e == 't') raw.push_back('\t');
          else pdann_error(line, "unknown escape");
          j += 2;
        } else if (s[j] == '\'') {
          closed = true;
          break;
        } else {
          raw.push_back(s[j++]);
        }
      }
      if (!closed) pdann_error(line, "unterminated letter literal");
      std::u32string letters;
      try {
        letters = decode_utf8(raw);
      } catch (const Error&) {
        pdann_error(line, "letter literal is not valid UTF-8");
      }
      if (letters.size() != 1)
        pdann_error(line, "letter literal must be a single character");
      out.push_back({PToken::kLiteral, "", letters[0]});
      i = j + 1;
    } else if (c == '{') {
      size_t k = s.find('}', i);
      if (k == std::string_view::npos) pdann_error(line, "unterminated '{'");
      out.push_back({PToken::kWord, std::string(s.substr(i, k - i + 1)), 0});
      i = k + 1;
    } else if (word_char(c)) {
      size_t j = i;
      while (j < s.size() && word_char(s[j])) ++j;
      std::string w(s.substr(i, j - i));
      if (j < s.size() && s[j] == ':') {
        w += ':';
        ++j;
      }
      out.push_back({PToken::kWord, std::move(w), 0});
      i = j;
    } else {
      pdann_error(line, std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

}  // namespace

PDAnn parse_pdann(std::string_view text) {
  std::vector<std::pair<size_t, std::vector<PToken>>> lines;
  size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    auto toks = scan(text.substr(pos, nl - pos), line_no);
    if (!toks.empty()) lines.emplace_back(line_no, std::move(toks));
    pos = nl + 1;
  }

  PDAnn p;
  bool have_states = false;
  std::optional<std::string> initial;
  std::vector<std::string> finals;
  auto words = [&](size_t line, const std::vector<PToken>& t) {
    std::vector<std::string> out;
    for (size_t i = 1; i < t.size(); ++i) {
      if (t[i].kind != PToken::kWord || t[i].text.back() == ':')
        pdann_error(line, "expected a name");
      out.push_back(t[i].text);
    }
    return out;
  };
  for (const auto& [line, t] : lines) {
    if (t[0].kind != PToken::kWord || t[0].text.back() != ':')
      pdann_error(line, "expected a declaration or transition keyword");
    const std::string& kw = t[0].text;
    if (kw == "states:") {
      have_states = true;
      for (const auto& w : words(line, t)) p.intern_state(w);
    } else if (kw == "stack:") {
      for (const auto& w : words(line, t)) p.intern_stack_symbol(w);
    } else if (kw == "initial:") {
      auto w = words(line, t);
      if (w.size() != 1 || initial)
        pdann_error(line, "exactly one initial state expected");
      initial = w[0];
    } else if (kw == "final:") {
      for (const auto& w : words(line, t)) finals.push_back(w);
    }
  }
  if (!have_states) throw Error(ErrorCode::kSyntax, "missing 'states:' line");
  if (!initial) throw Error(ErrorCode::kSyntax, "missing 'initial:' line");

  auto state = [&](size_t line, const PToken& t) -> uint32_t {
    if (t.kind != PToken::kWord) pdann_error(line, "expected a state name");
    auto it = std::find(p.states.begin(), p.states.end(), t.text);
    if (it == p.states.end())
      throw Error(ErrorCode::kUndeclaredSymbol,
                  "line " + std::to_string(line) + ": undeclared state " + t.text);
    return it - p.states.begin();
  };
  auto symbol = [&](size_t line, const PToken& t) -> uint32_t {
    if (t.kind != PToken::kWord) pdann_error(line, "expected a stack symbol");
    auto it = std::find(p.stack_symbols.begin(), p.stack_symbols.end(), t.text);
    if (it == p.stack_symbols.end())
      throw Error(ErrorCode::kUndeclaredSymbol, "line " + std::to_string(line) +
                                                    ": undeclared stack symbol " +
                                                    t.text);
    return it - p.stack_symbols.begin();
  };
  auto letter = [&](size_t line, const PToken& t) -> Letter {
    if (t.kind != PToken::kLiteral) pdann_error(line, "expected a letter literal");
    return t.letter;
  };

  p.initial = state(0, {PToken::kWord, *initial, 0});
  for (const auto& f : finals) p.finals.insert(state(0, {PToken::kWord, f, 0}));

  for (const auto& [line, t] : lines) {
    const std::string& kw = t[0].text;
    auto arity = [&, &t = t, line = line](size_t n) {
      if (t.size() != n + 1)
        pdann_error(line, kw + " takes " + std::to_string(n) + " arguments");
    };
    Transition tr;
    if (kw == "read:") {
      arity(3);
      tr = {Transition::Kind::kRead, state(line, t[1]), state(line, t[3]),
            letter(line, t[2]), kNoAnnotation, 0};
    } else if (kw == "readw:") {
      arity(4);
      if (t[3].kind != PToken::kWord) pdann_error(line, "expected an annotation");
      tr = {Transition::Kind::kReadWrite, state(line, t[1]), state(line, t[4]),
            letter(line, t[2]), p.intern_annotation(t[3].text), 0};
    } else if (kw == "push:") {
      arity(3);
      tr = {Transition::Kind::kPush, state(line, t[1]), state(line, t[2]), 0,
            kNoAnnotation, symbol(line, t[3])};
    } else if (kw == "pop:") {
      arity(3);
      tr = {Transition::Kind::kPop, state(line, t[1]), state(line, t[3]), 0,
            kNoAnnotation, symbol(line, t[2])};
    } else if (kw == "states:" || kw == "stack:" || kw == "initial:" ||
               kw == "final:") {
      continue;
    } else {
      pdann_error(line, "unknown keyword " + kw);
    }
    p.add(tr);
  }
  return p;
}

std::string render_pdann(const PDAnn& p) {
  auto list = [](const std::string& kw, const std::vector<std::string>& xs) {
    std::string s = kw;
    for (const auto& x : xs) s += " " + x;
    return s + "\n";
  };
  std::string out = list("states:", p.states);
  out += "initial: " + p.states.at(p.initial) + "\n";
  std::vector<std::string> finals;
  for (uint32_t f : p.finals) finals.push_back(p.states[f]);
  out += list("final:", finals);
  out += list("stack:", p.stack_symbols);
  for (const Transition& t : p.transitions) {
    const std::string& from = p.states[t.from];
    const std::string& to = p.states[t.to];
    switch (t.kind) {
      case Transition::Kind::kRead:
        out += "read: " + from + " " + render_literal(t.letter) + " " + to;
        break;
      case Transition::Kind::kReadWrite:
        out += "readw: " + from + " " + render_literal(t.letter) + " " +
               p.annotations[t.annotation] + " " + to;
        break;
      case Transition::Kind::kPush:
        out += "push: " + from + " " + to + " " + p.stack_symbols[t.stack];
        break;
      case Transition::Kind::kPop:
        out += "pop: " + from + " " + p.stack_symbols[t.stack] + " " + to;
        break;
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conversions

PDAnn grammar_to_pdann(const AnnotatedGrammar& g) {
  for (const Rule& r : g.rules)
    for (const Symbol& s : r.rhs)
      if (s.is_op())
        throw Error(ErrorCode::kInvalidArgument,
                    "grammar contains variable operations");
  PDAnn p;
  p.annotations = g.annotations;
  p.initial = p.intern_state("q0");
  uint32_t qf = p.intern_state("qf");
  p.finals.insert(qf);
  std::vector<std::vector<uint32_t>> at(g.rules.size());
  for (size_t r = 0; r < g.rules.size(); ++r)
    for (size_t i = 0; i <= g.rules[r].rhs.size(); ++i)
      at[r].push_back(
          p.intern_state("r" + std::to_string(r) + "_" + std::to_string(i)));
  const auto by_lhs = g.rules_by_lhs();
  std::vector<int> symbol_of(p.states.size(), -1);
  auto stack_of = [&](uint32_t state) {
    if (symbol_of[state] < 0)
      symbol_of[state] = p.intern_stack_symbol(p.states[state]);
    return static_cast<uint32_t>(symbol_of[state]);
  };
  using K = Transition::Kind;
  if (!g.nonterminals.empty()) {
    for (uint32_t r : by_lhs[g.start]) {
      p.add({K::kPush, p.initial, at[r][0], 0, kNoAnnotation, stack_of(qf)});
      p.add({K::kPop, at[r].back(), qf, 0, kNoAnnotation, stack_of(qf)});
    }
  }
  for (size_t r = 0; r < g.rules.size(); ++r) {
    const Rule& rule = g.rules[r];
    for (size_t i = 0; i < rule.rhs.size(); ++i) {
      const Symbol& s = rule.rhs[i];
      if (s.is_terminal()) {
        p.add({s.terminal.annotated() ? K::kReadWrite : K::kRead, at[r][i],
               at[r][i + 1], s.terminal.letter, s.terminal.annotation, 0});
        continue;
      }
      uint32_t gamma = stack_of(at[r][i + 1]);
      for (uint32_t r2 : by_lhs[s.id]) {
        p.add({K::kPush, at[r][i], at[r2][0], 0, kNoAnnotation, gamma});
        p.add({K::kPop, at[r2].back(), at[r][i + 1], 0, kNoAnnotation, gamma});
      }
    }
  }
  p.alphabet.insert(g.alphabet.begin(), g.alphabet.end());
  return p;
}

AnnotatedGrammar pdann_to_grammar(const PDAnn& p) {
  using K = Transition::Kind;
  const uint32_t nq = p.states.size() + 1;  // plus the accepting sink
  const uint32_t sink = nq - 1;
  const uint32_t ng = p.stack_symbols.size() + 1;  // plus the bottom marker
  const uint32_t bottom = ng - 1;

  auto key = [&](uint32_t a, uint32_t g, uint32_t b) {
    return (static_cast<uint64_t>(a) * ng + g) * nq + b;
  };

  std::vector<std::vector<uint32_t>> reads_into(nq);
  std::vector<std::vector<uint32_t>> pushes_into(static_cast<size_t>(nq) * ng);
  std::vector<Transition> pops;
  for (const Transition& t : p.transitions) {
    if (t.kind == K::kRead || t.kind == K::kReadWrite) reads_into[t.to].push_back(t.from);
    else if (t.kind == K::kPush) pushes_into[t.to * ng + t.stack].push_back(t.from);
    else pops.push_back(t);
  }
  for (uint32_t f : p.finals) pops.push_back({K::kPop, f, sink, 0, kNoAnnotation, bottom});

  // Summaries (a, γ, b): from a with γ on top, run until γ is popped into b.
  std::vector<bool> in_r(static_cast<size_t>(nq) * ng * nq, false);
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> by_start(nq);  // (γ, b)
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> by_end(nq);    // (a, γ)
  std::vector<std::tuple<uint32_t, uint32_t, uint32_t>> work;
  auto add = [&](uint32_t a, uint32_t g, uint32_t b) {
    uint64_t k = key(a, g, b);
    if (in_r[k]) return;
    in_r[k] = true;
    work.emplace_back(a, g, b);
  };
  for (const Transition& t : pops) add(t.from, t.stack, t.to);
  while (!work.empty()) {
    auto [a, g, b] = work.back();
    work.pop_back();
    by_start[a].push_back({g, b});
    by_end[b].push_back({a, g});
    for (uint32_t x : reads_into[a]) add(x, g, b);
    // (a, g, b) as the pushed part of (x, γ, c) -> (a, g, b)(b, γ, c).
    for (uint32_t x : pushes_into[a * ng + g])
      for (auto [g2, c] : by_start[b]) add(x, g2, c);
    // (a, g, b) as the continuation of some pushed part ending in a.
    for (auto [q, g1] : by_end[a])
      for (uint32_t x : pushes_into[q * ng + g1]) add(x, g, b);
  }

  AnnotatedGrammar out;
  out.annotations = p.annotations;
  auto state_name = [&](uint32_t q) {
    return q == sink ? std::string("acc%") : p.states[q];
  };
  auto symbol_name = [&](uint32_t g) {
    return g == bottom ? std::string("bot%") : p.stack_symbols[g];
  };
  std::unordered_map<uint64_t, uint32_t> ids;
  std::vector<std::tuple<uint32_t, uint32_t, uint32_t>> pending;
  out.start = out.intern_nonterminal("S");
  auto nt = [&](uint32_t a, uint32_t g, uint32_t b) {
    uint64_t k = key(a, g, b);
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    uint32_t id = out.nonterminals.size();
    out.nonterminals.push_back("N%" + state_name(a) + "%" + symbol_name(g) + "%" +
                               state_name(b));
    ids.emplace(k, id);
    pending.emplace_back(a, g, b);
    return id;
  };

  std::vector<std::vector<const Transition*>> from(nq);
  for (const Transition& t : p.transitions)
    if (t.kind != K::kPop) from[t.from].push_back(&t);
  for (const Transition& t : pops) from[t.from].push_back(&t);

  if (!in_r[key(p.initial, bottom, sink)]) return out;
  out.add_rule(out.start, {Symbol::nonterminal(nt(p.initial, bottom, sink))});
  for (size_t next = 0; next < pending.size(); ++next) {
    auto [a, g, b] = pending[next];
    uint32_t lhs = ids.at(key(a, g, b));
    for (const Transition* t : from[a]) {
      switch (t->kind) {
        case K::kPop:
          if (t->stack == g && t->to == b) out.add_rule(lhs, {});
          break;
        case K::kRead:
        case K::kReadWrite:
          if (in_r[key(t->to, g, b)])
            out.add_rule(lhs, {Symbol::term(t->letter, t->annotation),
                               Symbol::nonterminal(nt(t->to, g, b))});
          break;
        case K::kPush:
          for (uint32_t r = 0; r < nq; ++r)
            if (in_r[key(t->to, t->stack, r)] && in_r[key(r, g, b)])
              out.add_rule(lhs, {Symbol::nonterminal(nt(t->to, t->stack, r)),
                                 Symbol::nonterminal(nt(r, g, b))});
          break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subset construction

namespace {

using PairSet = std::vector<std::pair<uint32_t, uint32_t>>;  // sorted
using TripleSet = std::vector<std::tuple<uint32_t, uint32_t, uint32_t>>;

}  // namespace

PDAnn det_modulo_profile(const PDAnn& p, size_t max_states) {
  using K = Transition::Kind;
  PDAnn out;
  out.annotations = p.annotations;
  out.alphabet = p.alphabet;

  std::vector<std::vector<const Transition*>> from(p.states.size());
  for (const Transition& t : p.transitions) from[t.from].push_back(&t);
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> pops_by(
      p.states.size());  // (γ, to)
  for (const Transition& t : p.transitions)
    if (t.kind == K::kPop) pops_by[t.from].push_back({t.stack, t.to});

  std::map<PairSet, uint32_t> state_ids;
  std::vector<PairSet> state_sets;
  std::map<TripleSet, uint32_t> symbol_ids;
  std::vector<TripleSet> symbol_sets;

  std::vector<uint32_t> work_states;
  auto state_of = [&](PairSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    auto it = state_ids.find(s);
    if (it != state_ids.end()) return it->second;
    if (state_sets.size() >= max_states)
      throw Error(ErrorCode::kSizeLimit,
                  "subset construction exceeds " + std::to_string(max_states) +
                      " states");
    uint32_t id = state_sets.size();
    state_sets.push_back(s);
    state_ids.emplace(std::move(s), id);
    out.states.push_back("D" + std::to_string(id));
    work_states.push_back(id);
    return id;
  };
  auto symbol_of = [&](TripleSet t) {
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    auto it = symbol_ids.find(t);
    if (it != symbol_ids.end()) return it->second;
    uint32_t id = symbol_sets.size();
    symbol_sets.push_back(t);
    symbol_ids.emplace(std::move(t), id);
    out.stack_symbols.push_back("G" + std::to_string(id));
    return id;
  };

  out.initial = state_of({{p.initial, p.initial}});

  // Configurations (state, top) with top = UINT32_MAX for the empty stack.
  constexpr uint32_t kEmpty = UINT32_MAX;
  std::set<std::pair<uint32_t, uint32_t>> seen;
  std::vector<std::pair<uint32_t, uint32_t>> work;
  std::vector<std::set<uint32_t>> below;              // per symbol
  std::vector<std::set<uint32_t>> pop_targets;        // per symbol
  std::set<std::pair<uint32_t, uint32_t>> pops_done;  // (state, symbol)
  std::vector<bool> expanded;
  std::vector<std::vector<size_t>> moves;  // read and push transitions per state

  auto visit = [&](uint32_t s, uint32_t top) {
    if (seen.insert({s, top}).second) work.push_back({s, top});
  };
  auto grow = [&](uint32_t sym) {
    if (below.size() <= sym) {
      below.resize(sym + 1);
      pop_targets.resize(sym + 1);
    }
  };
  visit(out.initial, kEmpty);

  while (!work.empty()) {
    auto [s, top] = work.back();
    work.pop_back();
    if (expanded.size() <= s) {
      expanded.resize(s + 1, false);
      moves.resize(s + 1);
    }
    if (!expanded[s]) {
      expanded[s] = true;
      const PairSet cur = state_sets[s];
      // Reads and read-writes, grouped by (letter, annotation).
      std::map<std::pair<Letter, uint32_t>, PairSet> reads;
      TripleSet pushed;
      for (auto [a, b] : cur) {
        for (const Transition* t : from[b]) {
          if (t->kind == K::kRead || t->kind == K::kReadWrite)
            reads[{t->letter, t->annotation}].push_back({a, t->to});
          else if (t->kind == K::kPush)
            pushed.emplace_back(a, t->stack, t->to);
        }
      }
      for (auto& [la, targets] : reads) {
        uint32_t to = state_of(targets);
        moves[s].push_back(out.transitions.size());
        out.add({la.second == kNoAnnotation ? K::kRead : K::kReadWrite, s, to,
                 la.first, la.second, 0});
      }
      if (!pushed.empty()) {
        PairSet fresh;
        for (auto& [a, g, q] : pushed) fresh.push_back({q, q});
        uint32_t to = state_of(fresh);
        uint32_t sym = symbol_of(pushed);
        moves[s].push_back(out.transitions.size());
        out.add({K::kPush, s, to, 0, kNoAnnotation, sym});
      }
    }
    for (size_t ti : moves[s]) {
      const Transition t = out.transitions[ti];
      if (t.kind == K::kRead || t.kind == K::kReadWrite) {
        visit(t.to, top);
      } else if (t.kind == K::kPush) {
        grow(t.stack);
        if (below[t.stack].insert(top).second)
          for (uint32_t target : pop_targets[t.stack]) visit(target, top);
        visit(t.to, t.stack);
      }
    }
    if (top == kEmpty || !pops_done.insert({s, top}).second) continue;
    PairSet targets;
    for (auto& [a, g, q0] : symbol_sets[top])
      for (auto [c, d] : state_sets[s])
        if (c == q0)
          for (auto [g2, e] : pops_by[d])
            if (g2 == g) targets.push_back({a, e});
    if (targets.empty()) continue;
    uint32_t to = state_of(targets);
    out.add({K::kPop, s, to, 0, kNoAnnotation, top});
    grow(top);
    if (pop_targets[top].insert(to).second)
      for (uint32_t b : below[top]) visit(to, b);
  }

  for (uint32_t s = 0; s < state_sets.size(); ++s)
    for (auto [a, b] : state_sets[s])
      if (a == p.initial && p.finals.count(b)) out.finals.insert(s);
  return out;
}

bool is_deterministic_modulo_profile(const PDAnn& p) {
  using K = Transition::Kind;
  std::set<uint32_t> push_from;
  std::set<std::pair<uint32_t, uint32_t>> pop_from;
  std::set<std::tuple<uint32_t, Letter, uint32_t>> read_from;
  for (const Transition& t : p.transitions) {
    bool fresh = true;
    switch (t.kind) {
      case K::kPush:
        fresh = push_from.insert(t.from).second;
        break;
      case K::kPop:
        fresh = pop_from.insert({t.from, t.stack}).second;
        break;
      case K::kRead:
      case K::kReadWrite:
        fresh = read_from.insert({t.from, t.letter, t.annotation}).second;
        break;
    }
    if (!fresh) return false;
  }
  return true;
}

PDAnn strip_annotations(const PDAnn& p) {
  PDAnn out = p;
  out.annotations.clear();
  out.transitions.clear();
  std::set<Transition> seen;
  for (Transition t : p.transitions) {
    if (t.kind == Transition::Kind::kReadWrite) {
      t.kind = Transition::Kind::kRead;
      t.annotation = kNoAnnotation;
    }
    if (seen.insert(t).second) out.transitions.push_back(t);
  }
  return out;
}

PDAnn trim_states(const PDAnn& p) {
  const size_t n = p.states.size();
  std::vector<std::vector<uint32_t>> fwd(n), bwd(n);
  for (const Transition& t : p.transitions) {
    fwd[t.from].push_back(t.to);
    bwd[t.to].push_back(t.from);
  }
  auto closure = [&](std::vector<uint32_t> seeds,
                     const std::vector<std::vector<uint32_t>>& adj) {
    std::vector<bool> in(n, false);
    for (uint32_t s : seeds) in[s] = true;
    while (!seeds.empty()) {
      uint32_t s = seeds.back();
      seeds.pop_back();
      for (uint32_t t : adj[s])
        if (!in[t]) {
          in[t] = true;
          seeds.push_back(t);
        }
    }
    return in;
  };
  auto reach = closure({p.initial}, fwd);
  auto coreach = closure({p.finals.begin(), p.finals.end()}, bwd);

  PDAnn out;
  out.annotations = p.annotations;
  out.stack_symbols = p.stack_symbols;
  out.alphabet = p.alphabet;
  std::vector<uint32_t> remap(n, UINT32_MAX);
  auto keep = [&](uint32_t q) { return q == p.initial || (reach[q] && coreach[q]); };
  for (uint32_t q = 0; q < n; ++q)
    if (keep(q)) remap[q] = out.intern_state(p.states[q]);
  out.initial = remap[p.initial];
  for (uint32_t f : p.finals)
    if (remap[f] != UINT32_MAX && coreach[f] && reach[f]) out.finals.insert(remap[f]);
  for (Transition t : p.transitions) {
    if (!reach[t.from] || !coreach[t.from] || !reach[t.to] || !coreach[t.to])
      continue;
    t.from = remap[t.from];
    t.to = remap[t.to];
    out.transitions.push_back(t);
  }
  return out;
}

bool check_deterministic(const PDAnn& p) {
  using K = Transition::Kind;
  struct Seen {
    std::set<Letter> reads;
    std::set<uint32_t> pops;
    size_t pushes = 0;
  };
  std::vector<Seen> seen(p.states.size());
  for (const Transition& t : p.transitions) {
    Seen& s = seen[t.from];
    switch (t.kind) {
      case K::kReadWrite:
        return false;
      case K::kRead:
        if (!s.reads.insert(t.letter).second) return false;
        break;
      case K::kPop:
        if (!s.pops.insert(t.stack).second) return false;
        break;
      case K::kPush:
        ++s.pushes;
        break;
    }
  }
  for (const Seen& s : seen) {
    int kinds = !s.reads.empty() + !s.pops.empty() + (s.pushes > 0);
    if (kinds > 1 || s.pushes > 1) return false;
  }
  return true;
}

ProfileResult compute_profile(const PDAnn& p, std::u32string_view w,
                              uint64_t budget_factor) {
  using K = Transition::Kind;
  PDAnn a = trim_states(det_modulo_profile(strip_annotations(p)));
  if (!check_deterministic(a))
    throw Error(ErrorCode::kNotProfiledDeterministic,
                "the automaton is not profiled-deterministic");
  const size_t nq = a.states.size();
  std::vector<std::map<Letter, uint32_t>> reads(nq);
  std::vector<std::map<uint32_t, uint32_t>> pops(nq);
  std::vector<std::optional<std::pair<uint32_t, uint32_t>>> push(nq);
  for (const Transition& t : a.transitions) {
    if (t.kind == K::kRead) reads[t.from][t.letter] = t.to;
    else if (t.kind == K::kPop) pops[t.from][t.stack] = t.to;
    else push[t.from] = std::make_pair(t.to, t.stack);
  }

  ProfileResult res;
  res.det_states = nq;
  res.budget = budget_factor * (w.size() + 1) * nq;
  uint32_t q = a.initial;
  size_t i = 0;
  std::vector<uint32_t> stack;
  res.profile.push_back(0);
  for (;;) {
    if (i == w.size() && stack.empty() && a.finals.count(q)) return res;
    if (res.steps >= res.budget)
      throw Error(ErrorCode::kStepBudget, "step budget exhausted");
    ++res.steps;
    if (push[q]) {
      stack.push_back(push[q]->second);
      q = push[q]->first;
    } else if (!pops[q].empty()) {
      if (stack.empty()) throw Error(ErrorCode::kNoRun, "no accepting run");
      auto it = pops[q].find(stack.back());
      if (it == pops[q].end()) throw Error(ErrorCode::kNoRun, "no accepting run");
      stack.pop_back();
      q = it->second;
    } else {
      if (i == w.size()) throw Error(ErrorCode::kNoRun, "no accepting run");
      auto it = reads[q].find(w[i]);
      if (it == reads[q].end()) throw Error(ErrorCode::kNoRun, "no accepting run");
      ++i;
      q = it->second;
    }
    res.profile.push_back(stack.size());
  }
}

// ---------------------------------------------------------------------------
// Brute-force runs

std::vector<RunRecord> brute_runs(const PDAnn& p, std::u32string_view w,
                                  std::optional<size_t> depth_cap) {
  using K = Transition::Kind;
  const size_t nq = p.states.size();
  const size_t n = w.size();
  const size_t cap = depth_cap.value_or(4 * (n + 1) * nq);
  const size_t cells = nq * (n + 1);
  auto cell = [&](uint32_t q, size_t i) { return q * (n + 1) + i; };

  // bal[c] holds the cells reachable from c by a run that returns to the
  // same stack height without going below it.
  std::vector<std::vector<bool>> bal(cells, std::vector<bool>(cells, false));
  for (size_t c = 0; c < cells; ++c) bal[c][c] = true;
  for (bool changed = true; changed;) {
    changed = false;
    auto merge = [&](size_t into, size_t src) {
      for (size_t d = 0; d < cells; ++d)
        if (bal[src][d] && !bal[into][d]) bal[into][d] = changed = true;
    };
    for (const Transition& t : p.transitions) {
      if (t.kind == K::kRead || t.kind == K::kReadWrite) {
        for (size_t i = 0; i < n; ++i)
          if (w[i] == t.letter) merge(cell(t.from, i), cell(t.to, i + 1));
      } else if (t.kind == K::kPush) {
        for (size_t i = 0; i <= n; ++i)
          for (size_t d = 0; d < cells; ++d) {
            if (!bal[cell(t.to, i)][d]) continue;
            uint32_t q1 = d / (n + 1);
            size_t k = d % (n + 1);
            for (const Transition& u : p.transitions)
              if (u.kind == K::kPop && u.from == q1 && u.stack == t.stack)
                merge(cell(t.from, i), cell(u.to, k));
          }
      }
    }
  }

  // acc[depth][c]: from c with the current stack, acceptance is reachable.
  std::vector<std::vector<bool>> acc;
  acc.emplace_back(cells, false);
  for (size_t c = 0; c < cells; ++c)
    for (uint32_t f : p.finals)
      if (bal[c][cell(f, n)]) acc[0][c] = true;
  auto push_level = [&](uint32_t gamma) {
    std::vector<bool> next(cells, false);
    const std::vector<bool>& prev = acc.back();
    for (size_t c = 0; c < cells && true; ++c)
      for (size_t d = 0; d < cells && !next[c]; ++d) {
        if (!bal[c][d]) continue;
        uint32_t q = d / (n + 1);
        size_t j = d % (n + 1);
        for (const Transition& u : p.transitions)
          if (u.kind == K::kPop && u.from == q && u.stack == gamma &&
              prev[cell(u.to, j)]) {
            next[c] = true;
            break;
          }
      }
    acc.push_back(std::move(next));
  };

  std::vector<std::vector<uint32_t>> from(nq);
  for (uint32_t t = 0; t < p.transitions.size(); ++t)
    from[p.transitions[t].from].push_back(t);

  std::vector<RunRecord> runs;
  RunRecord cur;
  std::vector<uint32_t> stack;
  cur.profile.push_back(0);
  std::function<void(uint32_t, size_t)> dfs = [&](uint32_t q, size_t i) {
    if (!acc.back()[cell(q, i)]) return;
    if (i == n && stack.empty() && p.finals.count(q)) runs.push_back(cur);
    if (cur.transitions.size() >= cap) return;
    for (uint32_t ti : from[q]) {
      const Transition& t = p.transitions[ti];
      cur.transitions.push_back(ti);
      switch (t.kind) {
        case K::kRead:
        case K::kReadWrite:
          if (i < n && w[i] == t.letter) {
            if (t.kind == K::kReadWrite)
              cur.output.push_back({static_cast<uint32_t>(i + 1), t.annotation});
            cur.profile.push_back(stack.size());
            dfs(t.to, i + 1);
            cur.profile.pop_back();
            if (t.kind == K::kReadWrite) cur.output.pop_back();
          }
          break;
        case K::kPush:
          stack.push_back(t.stack);
          push_level(t.stack);
          cur.profile.push_back(stack.size());
          dfs(t.to, i);
          cur.profile.pop_back();
          acc.pop_back();
          stack.pop_back();
          break;
        case K::kPop:
          if (!stack.empty() && stack.back() == t.stack) {
            stack.pop_back();
            std::vector<bool> level = std::move(acc.back());
            acc.pop_back();
            cur.profile.push_back(stack.size());
            dfs(t.to, i);
            cur.profile.pop_back();
            acc.push_back(std::move(level));
            stack.push_back(t.stack);
          }
          break;
      }
      cur.transitions.pop_back();
    }
  };
  dfs(p.initial, 0);
  return runs;
}

std::set<Output> pdann_outputs(const PDAnn& p, std::u32string_view w) {
  std::set<Output> out;
  for (const RunRecord& r : brute_runs(p, w)) out.insert(r.output);
  return out;
}

AnnotatedGrammar disambiguate_rigid(const AnnotatedGrammar& g) {
  return pdann_to_grammar(det_modulo_profile(grammar_to_pdann(trim_useless(g))));
}

std::vector<Output> enumerate_pdann(const PDAnn& p, std::u32string_view w,
                                    std::optional<size_t> limit) {
  return evaluate(pdann_to_grammar(p), w, limit);
}

}  // namespace agenum
