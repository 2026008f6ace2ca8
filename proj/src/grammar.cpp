#include "agenum/grammar.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <map>
#include <optional>
#include <unordered_map>

#include "agenum/error.hpp"
#include "agenum/utf8.hpp"

namespace agenum {

size_t AnnotatedGrammar::size() const {
  size_t n = 0;
  for (const Rule& r : rules) n += 1 + r.rhs.size();
  return n;
}

uint32_t AnnotatedGrammar::intern_nonterminal(std::string_view name) {
  int found = find_nonterminal(name);
  if (found >= 0) return found;
  nonterminals.emplace_back(name);
  return nonterminals.size() - 1;
}

uint32_t AnnotatedGrammar::intern_annotation(std::string_view name) {
  int found = find_annotation(name);
  if (found >= 0) return found;
  annotations.emplace_back(name);
  return annotations.size() - 1;
}

int AnnotatedGrammar::find_nonterminal(std::string_view name) const {
  for (size_t i = 0; i < nonterminals.size(); ++i)
    if (nonterminals[i] == name) return i;
  return -1;
}

int AnnotatedGrammar::find_annotation(std::string_view name) const {
  for (size_t i = 0; i < annotations.size(); ++i)
    if (annotations[i] == name) return i;
  return -1;
}

void AnnotatedGrammar::add_rule(uint32_t lhs, std::vector<Symbol> rhs) {
  for (const Symbol& s : rhs)
    if (s.is_terminal()) alphabet.insert(s.terminal.letter);
  rules.push_back({lhs, std::move(rhs)});
}

std::vector<std::vector<uint32_t>> AnnotatedGrammar::rules_by_lhs() const {
  std::vector<std::vector<uint32_t>> by(nonterminals.size());
  for (size_t r = 0; r < rules.size(); ++r) by[rules[r].lhs].push_back(r);
  return by;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '_' || c == '%';
}

struct Token {
  enum Kind { kIdent, kArrow, kBar, kEps, kLiteral, kColon, kOpen, kClose };
  Kind kind;
  std::string text;  // identifier, variable, or annotation name
  Letter letter = 0;
  bool annotated = false;
  size_t column = 0;
};

[[noreturn]] void syntax_error(size_t line, size_t column,
                               const std::string& what) {
  throw Error(ErrorCode::kSyntax, "line " + std::to_string(line) +
                                      ", column " + std::to_string(column) +
                                      ": " + what);
}

std::vector<Token> tokenize(std::string_view s, size_t line) {
  std::vector<Token> out;
  size_t i = 0;
  auto read_ident = [&](size_t at) {
    size_t j = at;
    while (j < s.size() && ident_char(s[j])) ++j;
    return j;
  };
  while (i < s.size()) {
    char c = s[i];
    size_t col = i + 1;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '#') {
      break;
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      out.push_back({Token::kArrow, "", 0, false, col});
      i += 2;
    } else if (c == '|') {
      out.push_back({Token::kBar, "", 0, false, col});
      ++i;
    } else if (c == ':') {
      out.push_back({Token::kColon, "", 0, false, col});
      ++i;
    } else if (c == '_' && (i + 1 == s.size() || !ident_char(s[i + 1]))) {
      out.push_back({Token::kEps, "", 0, false, col});
      ++i;
    } else if (c == '+' || c == '-') {
      if (i + 1 >= s.size() || !ident_start(s[i + 1]))
        syntax_error(line, col, "expected variable name after '" +
                                    std::string(1, c) + "'");
      size_t j = read_ident(i + 1);
      out.push_back({c == '+' ? Token::kOpen : Token::kClose,
                     std::string(s.substr(i + 1, j - i - 1)), 0, false, col});
      i = j;
    } else if (ident_start(c)) {
      size_t j = read_ident(i);
      out.push_back({Token::kIdent, std::string(s.substr(i, j - i)), 0, false,
                     col});
      i = j;
    } else if (c == '\'') {
      // Collect raw bytes up to the closing quote, honoring escapes.
      std::string raw;
      size_t j = i + 1;
      bool closed = false;
      while (j < s.size()) {
        if (s[j] == '\\') {
          if (j + 1 >= s.size()) break;
          char e = s[j + 1];
          if (e == '\'' || e == '\\') raw.push_back(e);
          else if (e == 'n') raw.push_back('\n');
          else if (e == 't') raw.push_back('\t');
          else syntax_error(line, j + 1, "unknown escape '\\" +
                                             std::string(1, e) + "'");
          j += 2;
        } else if (s[j] == '\'') {
          closed = true;
          break;
        } else {
          raw.push_back(s[j]);
          ++j;
        }
      }
      if (!closed) syntax_error(line, col, "unterminated terminal literal");
      std::u32string letters;
      try {
        letters = decode_utf8(raw);
      } catch (const Error&) {
        syntax_error(line, col, "terminal literal is not valid UTF-8");
      }
      if (letters.size() != 1)
        syntax_error(line, col,
                     "terminal literal must be a single character");
      Token t{Token::kLiteral, "", letters[0], false, col};
      i = j + 1;
      if (i < s.size() && s[i] == '@') {
        ++i;
        if (i < s.size() && s[i] == '{') {
          size_t k = s.find('}', i);
          if (k == std::string_view::npos)
            syntax_error(line, i + 1, "unterminated annotation set");
          t.text = std::string(s.substr(i, k - i + 1));
          i = k + 1;
        } else if (i < s.size() && ident_start(s[i])) {
          size_t k = read_ident(i);
          t.text = std::string(s.substr(i, k - i));
          i = k;
        } else {
          syntax_error(line, i + 1, "expected annotation after '@'");
        }
        t.annotated = true;
      }
      out.push_back(std::move(t));
    } else {
      syntax_error(line, col,
                   std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

ExtractionGrammar parse_impl(std::string_view text, bool extraction) {
  std::vector<std::pair<size_t, std::vector<Token>>> lines;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    auto toks = tokenize(text.substr(pos, nl - pos), line_no);
    if (!toks.empty()) lines.emplace_back(line_no, std::move(toks));
    pos = nl + 1;
  }

  ExtractionGrammar h;
  AnnotatedGrammar& g = h.cfg;
  auto is_decl = [](const std::vector<Token>& t, const char* word) {
    return t.size() >= 2 && t[0].kind == Token::kIdent && t[0].text == word &&
           t[1].kind == Token::kColon;
  };

  for (auto& [ln, toks] : lines) {
    if (!is_decl(toks, "vars")) continue;
    if (!extraction)
      syntax_error(ln, toks[0].column,
                   "variable declarations are only allowed in extraction "
                   "grammars");
    for (size_t i = 2; i < toks.size(); ++i) {
      if (toks[i].kind != Token::kIdent)
        syntax_error(ln, toks[i].column, "expected variable name");
      if (std::find(h.variables.begin(), h.variables.end(), toks[i].text) !=
          h.variables.end())
        syntax_error(ln, toks[i].column,
                     "duplicate variable '" + toks[i].text + "'");
      h.variables.push_back(toks[i].text);
    }
  }

  std::optional<uint32_t> start;
  size_t start_line = 0;
  for (auto& [ln, toks] : lines) {
    if (is_decl(toks, "vars")) continue;
    if (is_decl(toks, "start")) {
      if (toks.size() != 3 || toks[2].kind != Token::kIdent)
        syntax_error(ln, toks[0].column, "expected 'start: <Ident>'");
      if (start)
        throw Error(ErrorCode::kDuplicateStart,
                    "line " + std::to_string(ln) +
                        ": duplicate start declaration (first on line " +
                        std::to_string(start_line) + ")");
      start = g.intern_nonterminal(toks[2].text);
      start_line = ln;
      continue;
    }
    if (toks[0].kind != Token::kIdent)
      syntax_error(ln, toks[0].column, "expected nonterminal name");
    if (toks.size() < 2 || toks[1].kind != Token::kArrow)
      syntax_error(ln, toks[0].column + toks[0].text.size(),
                   "expected '->' after '" + toks[0].text + "'");
    uint32_t lhs = g.intern_nonterminal(toks[0].text);
    std::vector<Symbol> alt;
    bool saw_eps = false;
    size_t alt_col = toks[1].column + 2;
    auto finish_alt = [&](size_t col) {
      if (!saw_eps && alt.empty())
        syntax_error(ln, col, "empty alternative (write _ for epsilon)");
      g.add_rule(lhs, std::move(alt));
      alt.clear();
      saw_eps = false;
    };
    for (size_t i = 2; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (t.kind == Token::kBar) {
        finish_alt(t.column);
        alt_col = t.column + 1;
        continue;
      }
      if (saw_eps)
        syntax_error(ln, t.column, "'_' must be the only symbol of its "
                                   "alternative");
      switch (t.kind) {
        case Token::kEps:
          if (!alt.empty())
            syntax_error(ln, t.column, "'_' must be the only symbol of its "
                                       "alternative");
          saw_eps = true;
          break;
        case Token::kIdent:
          alt.push_back(Symbol::nonterminal(g.intern_nonterminal(t.text)));
          break;
        case Token::kLiteral: {
          uint32_t ann = kNoAnnotation;
          if (t.annotated) {
            if (extraction)
              syntax_error(ln, t.column, "annotated letters are not allowed "
                                         "in extraction grammars");
            ann = g.intern_annotation(t.text);
          }
          alt.push_back(Symbol::term(t.letter, ann));
          break;
        }
        case Token::kOpen:
        case Token::kClose: {
          if (!extraction)
            syntax_error(ln, t.column, "variable operations are only "
                                       "allowed in extraction grammars");
          auto it = std::find(h.variables.begin(), h.variables.end(), t.text);
          if (it == h.variables.end())
            throw Error(ErrorCode::kUndeclaredSymbol,
                        "line " + std::to_string(ln) + ", column " +
                            std::to_string(t.column) +
                            ": undeclared variable '" + t.text + "'");
          uint32_t v = it - h.variables.begin();
          alt.push_back(t.kind == Token::kOpen ? Symbol::open(v)
                                               : Symbol::close(v));
          break;
        }
        default:
          syntax_error(ln, t.column, "unexpected token");
      }
    }
    finish_alt(alt_col);
  }
  if (start) {
    g.start = *start;
  } else if (!g.rules.empty()) {
    g.start = g.rules.front().lhs;
  } else {
    g.start = g.intern_nonterminal("S");
  }
  return h;
}

std::string render_letter(Letter a) {
  std::string out = "'";
  if (a == '\'') out += "\\'";
  else if (a == '\\') out += "\\\\";
  else if (a == '\n') out += "\\n";
  else if (a == '\t') out += "\\t";
  else append_utf8(a, &out);
  out += "'";
  return out;
}

std::string render_symbol(const AnnotatedGrammar& g,
                          const std::vector<std::string>* vars,
                          const Symbol& s) {
  switch (s.kind) {
    case Symbol::Kind::kNonterminal:
      return g.nonterminals[s.id];
    case Symbol::Kind::kTerminal:
      return render_terminal(g, s.terminal);
    case Symbol::Kind::kOpen:
      return "+" + (vars ? (*vars)[s.id] : std::to_string(s.id));
    case Symbol::Kind::kClose:
      return "-" + (vars ? (*vars)[s.id] : std::to_string(s.id));
  }
  return "";
}

std::string render_impl(const AnnotatedGrammar& g,
                        const std::vector<std::string>* vars) {
  std::string out = "start: " + g.nonterminals[g.start] + "\n";
  if (vars && !vars->empty()) {
    out += "vars:";
    for (const std::string& v : *vars) out += " " + v;
    out += "\n";
  }
  // Groups follow first appearance when read from the start line down, so
  // that parsing the rendering reproduces the same order.
  auto by_lhs = g.rules_by_lhs();
  std::vector<bool> queued(g.nonterminals.size(), false);
  std::vector<uint32_t> order;
  auto visit_from = [&](uint32_t root) {
    std::deque<uint32_t> queue{root};
    queued[root] = true;
    while (!queue.empty()) {
      uint32_t x = queue.front();
      queue.pop_front();
      order.push_back(x);
      for (uint32_t r : by_lhs[x])
        for (const Symbol& s : g.rules[r].rhs)
          if (s.is_nonterminal() && !queued[s.id]) {
            queued[s.id] = true;
            queue.push_back(s.id);
          }
    }
  };
  visit_from(g.start);
  for (uint32_t x = 0; x < g.nonterminals.size(); ++x)
    if (!queued[x] && !by_lhs[x].empty()) visit_from(x);
  for (uint32_t x : order) {
    if (by_lhs[x].empty()) continue;
    out += g.nonterminals[x] + " ->";
    bool first = true;
    for (uint32_t r : by_lhs[x]) {
      if (!first) out += " |";
      first = false;
      const auto& rhs = g.rules[r].rhs;
      if (rhs.empty()) out += " _";
      for (const Symbol& s : rhs) out += " " + render_symbol(g, vars, s);
    }
    out += "\n";
  }
  return out;
}

}  // namespace

AnnotatedGrammar parse_grammar(std::string_view text) {
  return parse_impl(text, false).cfg;
}

ExtractionGrammar parse_extraction_grammar(std::string_view text) {
  return parse_impl(text, true);
}

std::string render_literal(Letter a) { return render_letter(a); }

std::string render_terminal(const AnnotatedGrammar& g, const Terminal& t) {
  std::string out = render_letter(t.letter);
  if (t.annotated()) out += "@" + g.annotations[t.annotation];
  return out;
}

std::string render_annotated_string(const AnnotatedGrammar& g,
                                    const AnnotatedString& s) {
  std::string out;
  for (const Terminal& t : s) {
    if (!out.empty()) out += " ";
    out += render_terminal(g, t);
  }
  return out;
}

std::string render_grammar(const AnnotatedGrammar& g) {
  return render_impl(g, nullptr);
}

std::string render_extraction_grammar(const ExtractionGrammar& h) {
  return render_impl(h.cfg, &h.variables);
}

// ---------------------------------------------------------------------------
// Nullable, trimming, 2NF

std::vector<bool> compute_nullable(const AnnotatedGrammar& g) {
  const size_t n = g.nonterminals.size();
  std::vector<bool> nullable(n, false);
  // pending[r] counts rhs symbols of rule r not yet known to be nullable.
  std::vector<size_t> pending(g.rules.size());
  std::vector<std::vector<uint32_t>> uses(n);
  std::vector<uint32_t> work;
  for (size_t r = 0; r < g.rules.size(); ++r) {
    size_t p = 0;
    bool blocked = false;
    for (const Symbol& s : g.rules[r].rhs) {
      if (!s.is_nonterminal()) {
        blocked = true;
      } else {
        ++p;
        uses[s.id].push_back(r);
      }
    }
    pending[r] = blocked ? SIZE_MAX : p;
    if (p == 0 && !blocked && !nullable[g.rules[r].lhs]) {
      nullable[g.rules[r].lhs] = true;
      work.push_back(g.rules[r].lhs);
    }
  }
  while (!work.empty()) {
    uint32_t x = work.back();
    work.pop_back();
    for (uint32_t r : uses[x]) {
      if (pending[r] == SIZE_MAX) continue;
      if (--pending[r] == 0 && !nullable[g.rules[r].lhs]) {
        nullable[g.rules[r].lhs] = true;
        work.push_back(g.rules[r].lhs);
      }
    }
  }
  return nullable;
}

AnnotatedGrammar trim_useless(const AnnotatedGrammar& g) {
  const size_t n = g.nonterminals.size();
  std::vector<bool> productive(n, false);
  std::vector<size_t> pending(g.rules.size(), 0);
  std::vector<std::vector<uint32_t>> uses(n);
  std::vector<uint32_t> work;
  for (size_t r = 0; r < g.rules.size(); ++r) {
    for (const Symbol& s : g.rules[r].rhs)
      if (s.is_nonterminal()) {
        ++pending[r];
        uses[s.id].push_back(r);
      }
    uint32_t x = g.rules[r].lhs;
    if (pending[r] == 0 && !productive[x]) {
      productive[x] = true;
      work.push_back(x);
    }
  }
  while (!work.empty()) {
    uint32_t x = work.back();
    work.pop_back();
    for (uint32_t r : uses[x])
      if (--pending[r] == 0 && !productive[g.rules[r].lhs]) {
        productive[g.rules[r].lhs] = true;
        work.push_back(g.rules[r].lhs);
      }
  }

  auto by_lhs = g.rules_by_lhs();
  std::vector<bool> reachable(n, false);
  std::vector<bool> keep_rule(g.rules.size(), false);
  if (productive[g.start]) {
    reachable[g.start] = true;
    work.push_back(g.start);
  }
  while (!work.empty()) {
    uint32_t x = work.back();
    work.pop_back();
    for (uint32_t r : by_lhs[x]) {
      if (pending[r] != 0) continue;
      keep_rule[r] = true;
      for (const Symbol& s : g.rules[r].rhs)
        if (s.is_nonterminal() && !reachable[s.id]) {
          reachable[s.id] = true;
          work.push_back(s.id);
        }
    }
  }

  AnnotatedGrammar out;
  out.annotations = g.annotations;
  out.alphabet = g.alphabet;
  std::vector<uint32_t> remap(n, UINT32_MAX);
  for (uint32_t x = 0; x < n; ++x)
    if (reachable[x] || x == g.start) {
      remap[x] = out.nonterminals.size();
      out.nonterminals.push_back(g.nonterminals[x]);
    }
  out.start = remap[g.start];
  for (size_t r = 0; r < g.rules.size(); ++r) {
    if (!keep_rule[r]) continue;
    Rule rule = g.rules[r];
    rule.lhs = remap[rule.lhs];
    for (Symbol& s : rule.rhs)
      if (s.is_nonterminal()) s.id = remap[s.id];
    out.rules.push_back(std::move(rule));
  }
  return out;
}

namespace {

class FreshNames {
 public:
  explicit FreshNames(AnnotatedGrammar* g) : g_(g) {}

  uint32_t make(const std::string& stem) {
    for (;;) {
      std::string name = stem + "%" + std::to_string(counter_++);
      if (g_->find_nonterminal(name) < 0) {
        g_->nonterminals.push_back(name);
        return g_->nonterminals.size() - 1;
      }
    }
  }

 private:
  AnnotatedGrammar* g_;
  uint64_t counter_ = 1;
};

std::string letter_stem(Letter a) {
  if ((a >= 'a' && a <= 'z') || (a >= 'A' && a <= 'Z') ||
      (a >= '0' && a <= '9'))
    return std::string(1, static_cast<char>(a));
  char buf[16];
  std::snprintf(buf, sizeof buf, "u%X", static_cast<unsigned>(a));
  return buf;
}

}  // namespace

AnnotatedGrammar binarize(const AnnotatedGrammar& g) {
  AnnotatedGrammar out = g;
  out.rules.clear();
  FreshNames fresh(&out);
  for (const Rule& rule : g.rules) {
    if (rule.rhs.size() <= 2) {
      out.rules.push_back(rule);
      continue;
    }
    uint32_t lhs = rule.lhs;
    const std::string stem = g.nonterminals[rule.lhs];
    for (size_t i = 0; i + 2 < rule.rhs.size(); ++i) {
      uint32_t next = fresh.make(stem);
      out.rules.push_back({lhs, {rule.rhs[i], Symbol::nonterminal(next)}});
      lhs = next;
    }
    out.rules.push_back(
        {lhs, {rule.rhs[rule.rhs.size() - 2], rule.rhs.back()}});
  }
  std::map<Symbol, uint32_t> lifted;
  std::vector<Rule> extra;
  for (Rule& rule : out.rules) {
    if (rule.rhs.size() != 2) continue;
    for (Symbol& s : rule.rhs) {
      if (s.is_nonterminal()) continue;
      auto it = lifted.find(s);
      if (it == lifted.end()) {
        std::string stem = "T%";
        if (s.is_terminal()) stem += letter_stem(s.terminal.letter);
        else stem += (s.kind == Symbol::Kind::kOpen ? "open" : "close");
        uint32_t t = fresh.make(stem);
        extra.push_back({t, {s}});
        it = lifted.emplace(s, t).first;
      }
      s = Symbol::nonterminal(it->second);
    }
  }
  for (Rule& r : extra) out.rules.push_back(std::move(r));
  return out;
}

UnitTable build_unit_table(const AnnotatedGrammar& g2,
                           const std::vector<bool>& nullable) {
  const size_t n = g2.nonterminals.size();
  UnitTable t;
  t.d.assign(n, {});
  t.crule.assign(n, {});
  for (size_t r = 0; r < g2.rules.size(); ++r) {
    const Rule& rule = g2.rules[r];
    if (rule.rhs.size() == 1 && rule.rhs[0].is_nonterminal()) {
      t.d[rule.rhs[0].id].push_back(rule.lhs);
    } else if (rule.rhs.size() == 2) {
      uint32_t y = rule.rhs[0].id;
      uint32_t z = rule.rhs[1].id;
      t.crule[z].push_back(r);
      if (nullable[y]) t.d[z].push_back(rule.lhs);
      if (nullable[z]) t.d[y].push_back(rule.lhs);
    }
  }
  std::vector<size_t> indeg(n, 0);
  for (uint32_t z = 0; z < n; ++z)
    for (uint32_t x : t.d[z]) ++indeg[x];
  std::deque<uint32_t> queue;
  for (uint32_t z = 0; z < n; ++z)
    if (indeg[z] == 0) queue.push_back(z);
  while (!queue.empty()) {
    uint32_t z = queue.front();
    queue.pop_front();
    t.topo_order.push_back(z);
    for (uint32_t x : t.d[z])
      if (--indeg[x] == 0) queue.push_back(x);
  }
  if (t.topo_order.size() == n) return t;

  // Walk backwards along unresolved edges until a node repeats.
  std::vector<int> pred(n, -1);
  for (uint32_t z = 0; z < n; ++z)
    for (uint32_t x : t.d[z])
      if (indeg[x] > 0 && indeg[z] > 0) pred[x] = z;
  uint32_t cur = 0;
  while (indeg[cur] == 0) ++cur;
  std::vector<int> seen(n, -1);
  std::vector<uint32_t> path;
  while (seen[cur] < 0) {
    seen[cur] = path.size();
    path.push_back(cur);
    cur = pred[cur];
  }
  std::vector<uint32_t> cycle(path.begin() + seen[cur], path.end());
  // Each element derives the next one through a unit or nullable step.
  std::string msg = "unit cycle: ";
  for (uint32_t x : cycle) msg += g2.nonterminals[x] + " -> ";
  msg += g2.nonterminals[cycle.front()];
  throw Error(ErrorCode::kUnitCycle, msg);
}

Grammar2NF to_2nf(const AnnotatedGrammar& g) {
  Grammar2NF out;
  out.base = binarize(trim_useless(g));
  out.nullable = compute_nullable(out.base);
  out.units = build_unit_table(out.base, out.nullable);
  return out;
}

bool is_2nf(const AnnotatedGrammar& g) {
  for (const Rule& r : g.rules) {
    for (const Symbol& s : r.rhs)
      if (s.is_op()) return false;
    if (r.rhs.size() > 2) return false;
    if (r.rhs.size() == 2 &&
        (!r.rhs[0].is_nonterminal() || !r.rhs[1].is_nonterminal()))
      return false;
  }
  return true;
}

std::string shape_of(std::span<const Symbol> form) {
  std::string out;
  out.reserve(form.size());
  for (const Symbol& s : form) out.push_back(s.is_nonterminal() ? '1' : '0');
  return out;
}

std::u32string str_of(const AnnotatedString& s) {
  std::u32string out;
  for (const Terminal& t : s) out.push_back(t.letter);
  return out;
}

}  // namespace agenum
