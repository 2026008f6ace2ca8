#include "agenum/spanner.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "agenum/enumerator.hpp"
#include "agenum/error.hpp"
#include "agenum/utf8.hpp"
#include "json.hpp"

namespace agenum {

Mapping mapping_of_refword(const RefWord& r,
                           const std::vector<std::string>& vars) {
  std::vector<int> open(vars.size(), -1), close(vars.size(), -1);
  uint32_t pos = 1;
  for (const RefSymbol& s : r) {
    if (!s.is_op) {
      ++pos;
      continue;
    }
    if (s.op.var >= vars.size())
      throw Error(ErrorCode::kInvalidRefWord, "unknown variable");
    const std::string& x = vars[s.op.var];
    if (!s.op.close) {
      if (open[s.op.var] >= 0)
        throw Error(ErrorCode::kInvalidRefWord, "variable " + x + " opened twice");
      open[s.op.var] = pos;
    } else {
      if (open[s.op.var] < 0)
        throw Error(ErrorCode::kInvalidRefWord,
                    "variable " + x + " closed before it was opened");
      if (close[s.op.var] >= 0)
        throw Error(ErrorCode::kInvalidRefWord, "variable " + x + " closed twice");
      close[s.op.var] = pos;
    }
  }
  Mapping m;
  for (size_t x = 0; x < vars.size(); ++x) {
    if (close[x] < 0)
      throw Error(ErrorCode::kInvalidRefWord,
                  "variable " + vars[x] + " is never closed");
    m[vars[x]] = {static_cast<uint32_t>(open[x]), static_cast<uint32_t>(close[x])};
  }
  return m;
}

SpanOutput encode_out(const Mapping& m, const std::vector<std::string>& vars) {
  std::map<uint32_t, OpSet> groups;
  for (uint32_t x = 0; x < vars.size(); ++x) {
    auto it = m.find(vars[x]);
    if (it == m.end()) continue;
    groups[it->second.begin].push_back({x, false});
    groups[it->second.end].push_back({x, true});
  }
  SpanOutput out;
  for (auto& [pos, ops] : groups) {
    std::sort(ops.begin(), ops.end());
    out.emplace_back(pos, std::move(ops));
  }
  return out;
}

Mapping decode_output(const SpanOutput& o,
                      const std::vector<std::string>& vars) {
  std::vector<int64_t> open(vars.size(), -1), close(vars.size(), -1);
  for (const auto& [pos, ops] : o) {
    for (VariableOp op : ops) {
      if (op.var >= vars.size())
        throw Error(ErrorCode::kMalformedOutput, "unknown variable");
      int64_t& slot = op.close ? close[op.var] : open[op.var];
      if (slot >= 0)
        throw Error(ErrorCode::kMalformedOutput,
                    "duplicate operation on " + vars[op.var]);
      slot = pos;
    }
  }
  Mapping m;
  for (size_t x = 0; x < vars.size(); ++x) {
    if (open[x] < 0 || close[x] < 0)
      throw Error(ErrorCode::kMalformedOutput,
                  "missing operation on " + vars[x]);
    if (open[x] > close[x])
      throw Error(ErrorCode::kMalformedOutput,
                  vars[x] + " closes before it opens");
    m[vars[x]] = {static_cast<uint32_t>(open[x]), static_cast<uint32_t>(close[x])};
  }
  return m;
}

std::string opset_name(const OpSet& ops, const std::vector<std::string>& vars) {
  std::string s = "{";
  for (size_t i = 0; i < ops.size(); ++i) {
    if (i) s += ",";
    s += ops[i].close ? "-" : "+";
    s += vars.at(ops[i].var);
  }
  return s + "}";
}

OpSet parse_opset_name(std::string_view name,
                       const std::vector<std::string>& vars) {
  if (name.size() < 2 || name.front() != '{' || name.back() != '}')
    throw Error(ErrorCode::kMalformedOutput,
                "not an operation set: " + std::string(name));
  std::string_view body = name.substr(1, name.size() - 2);
  OpSet ops;
  while (!body.empty()) {
    size_t comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    body = comma == std::string_view::npos ? std::string_view{}
                                           : body.substr(comma + 1);
    if (item.size() < 2 || (item[0] != '+' && item[0] != '-'))
      throw Error(ErrorCode::kMalformedOutput,
                  "bad operation: " + std::string(item));
    auto it = std::find(vars.begin(), vars.end(), item.substr(1));
    if (it == vars.end())
      throw Error(ErrorCode::kMalformedOutput,
                  "unknown variable: " + std::string(item.substr(1)));
    ops.push_back({static_cast<uint32_t>(it - vars.begin()), item[0] == '-'});
  }
  std::sort(ops.begin(), ops.end());
  return ops;
}

SpanOutput span_output_of(const AnnotatedGrammar& translated, const Output& o,
                          const std::vector<std::string>& vars) {
  SpanOutput out;
  for (const OutputLetter& l : o)
    out.emplace_back(l.position,
                     parse_opset_name(translated.annotations.at(l.annotation), vars));
  return out;
}

// ---------------------------------------------------------------------------
// Translation

namespace {

// Extraction grammars with annotations: letters carry a bitmask of
// operations (bit 2x opens x, bit 2x+1 closes it).
struct XSym {
  enum class Kind : uint8_t { kNonterminal, kLetter, kOp };
  Kind kind = Kind::kNonterminal;
  uint32_t id = 0;  // nonterminal, or operation bit
  Letter letter = 0;
  uint32_t mask = 0;

  bool is_nt() const { return kind == Kind::kNonterminal; }
  auto operator<=>(const XSym&) const = default;
};

struct XRule {
  uint32_t lhs;
  std::vector<XSym> rhs;
};

struct XGrammar {
  std::vector<std::string> names;
  std::vector<XRule> rules;
  uint32_t start = 0;
};

class NameSet {
 public:
  explicit NameSet(const std::vector<std::string>& names)
      : used_(names.begin(), names.end()) {}
  std::string fresh(const std::string& base) {
    std::string name = base;
    while (used_.count(name)) name = base + "%" + std::to_string(counter_++);
    used_.insert(name);
    return name;
  }

 private:
  std::set<std::string> used_;
  size_t counter_ = 1;
};

XGrammar trim(const XGrammar& g) {
  const size_t n = g.names.size();
  std::vector<bool> productive(n, false);
  for (bool changed = true; changed;) {
    changed = false;
    for (const XRule& r : g.rules) {
      if (productive[r.lhs]) continue;
      if (std::all_of(r.rhs.begin(), r.rhs.end(), [&](const XSym& s) {
            return !s.is_nt() || productive[s.id];
          }))
        productive[r.lhs] = changed = true;
    }
  }
  std::vector<bool> reachable(n, false);
  if (productive[g.start]) {
    reachable[g.start] = true;
    for (bool changed = true; changed;) {
      changed = false;
      for (const XRule& r : g.rules) {
        if (!reachable[r.lhs]) continue;
        bool ok = std::all_of(r.rhs.begin(), r.rhs.end(), [&](const XSym& s) {
          return !s.is_nt() || productive[s.id];
        });
        if (!ok) continue;
        for (const XSym& s : r.rhs)
          if (s.is_nt() && !reachable[s.id]) reachable[s.id] = changed = true;
      }
    }
  }
  XGrammar out;
  std::vector<uint32_t> remap(n, UINT32_MAX);
  auto id_of = [&](uint32_t x) {
    if (remap[x] == UINT32_MAX) {
      remap[x] = out.names.size();
      out.names.push_back(g.names[x]);
    }
    return remap[x];
  };
  out.start = id_of(g.start);
  for (const XRule& r : g.rules) {
    if (!reachable[r.lhs]) continue;
    bool ok = std::all_of(r.rhs.begin(), r.rhs.end(), [&](const XSym& s) {
      return !s.is_nt() || (productive[s.id] && reachable[s.id]);
    });
    if (!ok) continue;
    XRule nr{id_of(r.lhs), r.rhs};
    for (XSym& s : nr.rhs)
      if (s.is_nt()) s.id = id_of(s.id);
    out.rules.push_back(std::move(nr));
  }
  return out;
}

// Rules become X -> Y Z, X -> ε or X -> τ; unit rules get an ε-deriving
// left neighbour.
XGrammar restricted_cnf(const XGrammar& g) {
  XGrammar out;
  out.names = g.names;
  out.start = g.start;
  NameSet names(g.names);
  std::map<XSym, uint32_t> lifted;
  auto add_nt = [&](const std::string& base) {
    out.names.push_back(names.fresh(base));
    return static_cast<uint32_t>(out.names.size() - 1);
  };
  std::optional<uint32_t> eps;
  auto lift = [&](const XSym& s) -> XSym {
    if (s.is_nt()) return s;
    auto it = lifted.find(s);
    if (it == lifted.end()) {
      uint32_t t = add_nt("T");
      out.rules.push_back({t, {s}});
      it = lifted.emplace(s, t).first;
    }
    return {XSym::Kind::kNonterminal, it->second, 0, 0};
  };
  for (const XRule& r : g.rules) {
    const size_t m = r.rhs.size();
    if (m == 0 || (m == 1 && !r.rhs[0].is_nt())) {
      out.rules.push_back(r);
      continue;
    }
    if (m == 1) {
      if (!eps) {
        eps = add_nt("E");
        out.rules.push_back({*eps, {}});
      }
      out.rules.push_back(
          {r.lhs, {{XSym::Kind::kNonterminal, *eps, 0, 0}, r.rhs[0]}});
      continue;
    }
    std::vector<XSym> rhs;
    for (const XSym& s : r.rhs) rhs.push_back(lift(s));
    uint32_t lhs = r.lhs;
    for (size_t i = 0; i + 2 < m; ++i) {
      uint32_t next = add_nt(g.names[r.lhs]);
      out.rules.push_back(
          {lhs, {rhs[i], {XSym::Kind::kNonterminal, next, 0, 0}}});
      lhs = next;
    }
    out.rules.push_back({lhs, {rhs[m - 2], rhs[m - 1]}});
  }
  return out;
}

enum Scope : uint32_t { kOut, kIn, kLeft, kMid, kRight, kScopes };

// Pushes the operation with bit `kappa` onto the next letter to its right.
XGrammar push_operation(const XGrammar& g, uint32_t kappa) {
  const uint32_t n = g.names.size();
  XGrammar out;
  static const char* kSuffix[kScopes] = {"%o", "%i", "%l", "%m", "%r"};
  NameSet names({});
  for (uint32_t a = 0; a < n; ++a)
    for (uint32_t s = 0; s < kScopes; ++s)
      out.names.push_back(names.fresh(g.names[a] + kSuffix[s]));
  out.names.push_back(names.fresh(g.names[g.start]));
  out.start = n * kScopes;

  auto nt = [&](uint32_t a, Scope s) {
    return XSym{XSym::Kind::kNonterminal, a * kScopes + s, 0, 0};
  };
  auto add = [&](uint32_t a, Scope s, std::vector<XSym> rhs) {
    out.rules.push_back({a * kScopes + s, std::move(rhs)});
  };
  const uint32_t bit = 1u << kappa;

  for (const XRule& r : g.rules) {
    const uint32_t a = r.lhs;
    if (r.rhs.size() == 2) {
      if (!r.rhs[0].is_nt() || !r.rhs[1].is_nt())
        throw Error(ErrorCode::kNotBinary, "rule is not in normal form");
      uint32_t b = r.rhs[0].id, c = r.rhs[1].id;
      if (a == g.start) {
        out.rules.push_back({out.start, {nt(b, kOut), nt(c, kOut)}});
        out.rules.push_back({out.start, {nt(b, kIn), nt(c, kOut)}});
        out.rules.push_back({out.start, {nt(b, kOut), nt(c, kIn)}});
        out.rules.push_back({out.start, {nt(b, kLeft), nt(c, kRight)}});
      }
      add(a, kOut, {nt(b, kOut), nt(c, kOut)});
      add(a, kIn, {nt(b, kIn), nt(c, kOut)});
      add(a, kIn, {nt(b, kOut), nt(c, kIn)});
      add(a, kIn, {nt(b, kLeft), nt(c, kRight)});
      add(a, kLeft, {nt(b, kOut), nt(c, kLeft)});
      add(a, kLeft, {nt(b, kLeft), nt(c, kMid)});
      add(a, kMid, {nt(b, kMid), nt(c, kMid)});
      add(a, kRight, {nt(b, kRight), nt(c, kOut)});
      add(a, kRight, {nt(b, kMid), nt(c, kRight)});
    } else if (r.rhs.empty()) {
      add(a, kOut, {});
      add(a, kMid, {});
    } else if (r.rhs.size() == 1 && r.rhs[0].kind == XSym::Kind::kLetter) {
      XSym t = r.rhs[0];
      add(a, kOut, {t});
      t.mask |= bit;
      add(a, kRight, {t});
    } else if (r.rhs.size() == 1 && r.rhs[0].kind == XSym::Kind::kOp) {
      if (r.rhs[0].id == kappa) {
        add(a, kLeft, {});
      } else {
        add(a, kOut, {r.rhs[0]});
        add(a, kMid, {r.rhs[0]});
      }
    } else {
      throw Error(ErrorCode::kNotBinary, "rule is not in normal form");
    }
  }
  return trim(out);
}

OpSet ops_of_mask(uint32_t mask) {
  OpSet ops;
  for (uint32_t b = 0; b < 32; ++b)
    if (mask & (1u << b)) ops.push_back({b / 2, (b & 1) != 0});
  return ops;
}

}  // namespace

AnnotatedGrammar translate(const ExtractionGrammar& h, Letter end_marker) {
  const AnnotatedGrammar& src = h.cfg;
  if (src.alphabet.count(end_marker))
    throw Error(ErrorCode::kInvalidArgument,
                "end marker " + encode_utf8(std::u32string(1, end_marker)) +
                    " occurs in the alphabet");
  if (h.variables.size() > 16)
    throw Error(ErrorCode::kInvalidArgument, "at most 16 variables supported");

  XGrammar g;
  g.names = src.nonterminals;
  if (g.names.empty()) g.names.push_back("S");
  for (const Rule& r : src.rules) {
    XRule xr{r.lhs, {}};
    for (const Symbol& s : r.rhs) {
      switch (s.kind) {
        case Symbol::Kind::kNonterminal:
          xr.rhs.push_back({XSym::Kind::kNonterminal, s.id, 0, 0});
          break;
        case Symbol::Kind::kTerminal:
          if (s.terminal.annotated())
            throw Error(ErrorCode::kInvalidArgument,
                        "extraction grammars cannot annotate letters");
          xr.rhs.push_back({XSym::Kind::kLetter, 0, s.terminal.letter, 0});
          break;
        case Symbol::Kind::kOpen:
        case Symbol::Kind::kClose:
          xr.rhs.push_back({XSym::Kind::kOp,
                            2 * s.id + (s.kind == Symbol::Kind::kClose), 0, 0});
          break;
      }
    }
    g.rules.push_back(std::move(xr));
  }
  NameSet names(g.names);
  g.names.push_back(names.fresh(g.names[src.start] + "%s"));
  uint32_t new_start = g.names.size() - 1;
  g.rules.push_back({new_start,
                     {{XSym::Kind::kNonterminal, src.start, 0, 0},
                      {XSym::Kind::kLetter, 0, end_marker, 0}}});
  g.start = new_start;
  g = trim(restricted_cnf(trim(g)));

  // Lexicographic by variable name, opening before closing.
  std::vector<uint32_t> order(h.variables.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return h.variables[a] < h.variables[b];
  });
  for (uint32_t x : order) {
    g = push_operation(g, 2 * x);
    g = push_operation(g, 2 * x + 1);
  }

  AnnotatedGrammar out;
  out.nonterminals = g.names;
  out.start = g.start;
  for (const XRule& r : g.rules) {
    std::vector<Symbol> rhs;
    for (const XSym& s : r.rhs) {
      switch (s.kind) {
        case XSym::Kind::kNonterminal:
          rhs.push_back(Symbol::nonterminal(s.id));
          break;
        case XSym::Kind::kLetter:
          rhs.push_back(Symbol::term(
              s.letter, s.mask ? out.intern_annotation(opset_name(
                                     ops_of_mask(s.mask), h.variables))
                               : kNoAnnotation));
          break;
        case XSym::Kind::kOp:
          throw Error(ErrorCode::kInvalidArgument,
                      "variable operation left after translation");
      }
    }
    out.add_rule(r.lhs, std::move(rhs));
  }
  return out;
}

std::vector<Mapping> enumerate_mappings(const ExtractionGrammar& h,
                                        std::u32string_view d,
                                        std::optional<size_t> limit,
                                        Letter end_marker) {
  if (d.find(end_marker) != std::u32string_view::npos)
    throw Error(ErrorCode::kInvalidArgument, "document contains the end marker");
  AnnotatedGrammar g = translate(h, end_marker);
  std::u32string text(d);
  text.push_back(end_marker);
  Evaluation ev(g, text);
  std::vector<Mapping> out;
  Output o;
  while ((!limit || out.size() < *limit) && ev.next(&o))
    out.push_back(decode_output(span_output_of(g, o, h.variables), h.variables));
  return out;
}

std::string mapping_to_json(const Mapping& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [x, span] : m) j[x] = {span.begin, span.end};
  return j.dump();
}

}  // namespace agenum
