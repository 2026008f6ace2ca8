#include "agenum/oracle.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

#include "agenum/error.hpp"

namespace agenum {

Count& Count::operator+=(const Count& o) {
  if (o.infinite_) infinite_ = true;
  if (!infinite_) value_ += o.value_;
  return *this;
}

Count operator*(const Count& a, const Count& b) {
  if (a.is_zero() || b.is_zero()) return Count();
  if (a.infinite_ || b.infinite_) return Count::infinite();
  Count c;
  c.value_ = a.value_ * b.value_;
  return c;
}

std::string Count::to_string() const {
  return infinite_ ? "inf" : value_.str();
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

using Key = Oracle::Key;
using Table = Oracle::Table;

}  // namespace

struct Oracle::Impl {
  struct Tables {
    std::vector<Table> val;  // nonterminals, then items
  };

  const AnnotatedGrammar& g;
  const bool track;
  const size_t max_entries;
  size_t entries = 0;

  size_t nt = 0;
  std::vector<size_t> item_base;  // unknown index of Item(r,1)
  size_t unknowns = 0;

  std::vector<Table> e_nt;
  std::vector<std::vector<Table>> e_item;  // e_item[r][p], p = 0..m_r

  std::unordered_map<std::u32string, Tables> memo;

  Impl(const AnnotatedGrammar& grammar, bool track_skeletons, size_t cap)
      : g(grammar), track(track_skeletons), max_entries(cap) {
    for (const Rule& r : g.rules)
      for (const Symbol& s : r.rhs)
        if (s.is_op())
          throw Error(ErrorCode::kInvalidArgument,
                      "oracle grammars cannot contain variable operations");
    nt = g.nonterminals.size();
    unknowns = nt;
    for (const Rule& r : g.rules) {
      item_base.push_back(unknowns);
      unknowns += r.rhs.size();
    }
    compute_eps();
  }

  size_t item(size_t r, size_t p) const { return item_base[r] + p - 1; }

  std::string inf_skel() const { return track ? kInfinite : ""; }

  std::string cat(const std::string& a, const std::string& b) const {
    if (!track) return {};
    if (a == kInfinite || b == kInfinite) return kInfinite;
    return a + b;
  }

  std::string wrap(const std::string& s) const {
    if (!track) return {};
    if (s == kInfinite) return kInfinite;
    return "(" + s + ")";
  }

  void put(Table* t, Key k, const Count& c) {
    if (c.is_zero()) return;
    if (k.second == kInfinite && track) {
      (*t)[std::move(k)] += Count::infinite();
      return;
    }
    auto [it, inserted] = t->try_emplace(std::move(k), c);
    if (!inserted) it->second += c;
    else if (++entries > max_entries)
      throw Error(ErrorCode::kScaleLimit, "oracle table limit exceeded");
  }

  // a ⊗ b with b's positions shifted by `shift`.
  void add_product(Table* out, const Table& a, const Table& b, uint32_t shift) {
    for (const auto& [ka, ca] : a) {
      for (const auto& [kb, cb] : b) {
        Output o = ka.first;
        for (OutputLetter l : kb.first) o.push_back({l.position + shift, l.annotation});
        put(out, {std::move(o), cat(ka.second, kb.second)}, ca * cb);
      }
    }
  }

  void add_wrapped(Table* out, const Table& a) {
    for (const auto& [k, c] : a) put(out, {k.first, wrap(k.second)}, c);
  }

  void compute_eps() {
    const auto by_lhs = g.rules_by_lhs();
    std::vector<bool> nullable(nt, false);
    for (bool changed = true; changed;) {
      changed = false;
      for (const Rule& r : g.rules) {
        if (nullable[r.lhs]) continue;
        bool all = std::all_of(r.rhs.begin(), r.rhs.end(), [&](const Symbol& s) {
          return s.is_nonterminal() && nullable[s.id];
        });
        if (all) nullable[r.lhs] = changed = true;
      }
    }
    auto eps_rule = [&](const Rule& r) {
      return std::all_of(r.rhs.begin(), r.rhs.end(), [&](const Symbol& s) {
        return s.is_nonterminal() && nullable[s.id];
      });
    };
    // X has infinitely many ε-derivations iff it reaches a cycle of the
    // ε-rule graph.
    std::vector<std::vector<uint32_t>> adj(nt);
    for (const Rule& r : g.rules)
      if (eps_rule(r))
        for (const Symbol& s : r.rhs) adj[r.lhs].push_back(s.id);
    std::vector<bool> on_cycle(nt, false);
    for (uint32_t x = 0; x < nt; ++x) {
      // x lies on a cycle iff x is reachable from one of its successors.
      std::vector<bool> seen(nt, false);
      std::vector<uint32_t> stack(adj[x].begin(), adj[x].end());
      while (!stack.empty() && !on_cycle[x]) {
        uint32_t y = stack.back();
        stack.pop_back();
        if (y == x) on_cycle[x] = true;
        if (seen[y]) continue;
        seen[y] = true;
        for (uint32_t z : adj[y]) stack.push_back(z);
      }
    }
    std::vector<bool> inf = on_cycle;
    for (bool changed = true; changed;) {
      changed = false;
      for (uint32_t x = 0; x < nt; ++x)
        for (uint32_t y : adj[x])
          if (inf[y] && !inf[x]) inf[x] = changed = true;
    }

    e_nt.assign(nt, {});
    std::vector<bool> done(nt, false);
    std::function<void(uint32_t)> solve = [&](uint32_t x) {
      if (done[x]) return;
      done[x] = true;
      if (!nullable[x]) return;
      if (inf[x]) {
        e_nt[x][{Output{}, inf_skel()}] = Count::infinite();
        return;
      }
      for (uint32_t r : by_lhs[x]) {
        const Rule& rule = g.rules[r];
        if (!eps_rule(rule)) continue;
        Table acc{{{Output{}, ""}, Count(1)}};
        for (const Symbol& s : rule.rhs) {
          solve(s.id);
          Table next;
          add_product(&next, acc, e_nt[s.id], 0);
          acc = std::move(next);
        }
        add_wrapped(&e_nt[x], acc);
      }
    };
    for (uint32_t x = 0; x < nt; ++x) solve(x);

    e_item.resize(g.rules.size());
    for (size_t r = 0; r < g.rules.size(); ++r) {
      const Rule& rule = g.rules[r];
      e_item[r].resize(rule.rhs.size() + 1);
      e_item[r][0][{Output{}, ""}] = Count(1);
      for (size_t p = 1; p <= rule.rhs.size(); ++p) {
        const Symbol& s = rule.rhs[p - 1];
        if (s.is_nonterminal())
          add_product(&e_item[r][p], e_item[r][p - 1], e_nt[s.id], 0);
      }
    }
  }

  Table terminal_table(const Terminal& t) const {
    Output o;
    if (t.annotated()) o.push_back({1, t.annotation});
    return {{{o, track ? "0" : ""}, Count(1)}};
  }

  enum class EdgeKind { kLeftMul, kRightMul, kWrap };
  struct Edge {
    size_t src;
    EdgeKind kind;
    const Table* coef;
  };

  void apply(Table* out, const Edge& e, const Table& src) {
    switch (e.kind) {
      case EdgeKind::kLeftMul:
        add_product(out, *e.coef, src, 0);
        break;
      case EdgeKind::kRightMul:
        add_product(out, src, *e.coef, 0);
        break;
      case EdgeKind::kWrap:
        add_wrapped(out, src);
        break;
    }
  }

  const Tables& get(const std::u32string& u) {
    auto it = memo.find(u);
    if (it != memo.end()) return it->second;
    const size_t n = u.size();
    std::vector<const Tables*> prefix(n), suffix(n);
    for (size_t k = 1; k < n; ++k) {
      prefix[k] = &get(u.substr(0, k));
      suffix[k] = &get(u.substr(k));
    }

    std::vector<Table> cst(unknowns);
    std::vector<std::vector<Edge>> deps(unknowns);
    for (size_t r = 0; r < g.rules.size(); ++r) {
      const Rule& rule = g.rules[r];
      const size_t m = rule.rhs.size();
      for (size_t p = 1; p <= m; ++p) {
        const Symbol& s = rule.rhs[p - 1];
        Table& c = cst[item(r, p)];
        if (p >= 2) {
          for (size_t k = 1; k < n; ++k) {
            const Table& left = prefix[k]->val[item(r, p - 1)];
            if (left.empty()) continue;
            if (s.is_nonterminal()) {
              add_product(&c, left, suffix[k]->val[s.id], k);
            } else if (k + 1 == n && s.terminal.letter == u[k]) {
              add_product(&c, left, terminal_table(s.terminal), k);
            }
          }
        }
        const Table& eps_prefix = e_item[r][p - 1];
        if (s.is_terminal()) {
          if (n == 1 && s.terminal.letter == u[0] && !eps_prefix.empty())
            add_product(&c, eps_prefix, terminal_table(s.terminal), 0);
        } else {
          if (!eps_prefix.empty())
            deps[item(r, p)].push_back({s.id, EdgeKind::kLeftMul, &eps_prefix});
          if (p >= 2 && !e_nt[s.id].empty())
            deps[item(r, p)].push_back(
                {item(r, p - 1), EdgeKind::kRightMul, &e_nt[s.id]});
        }
      }
      if (m >= 1) deps[rule.lhs].push_back({item(r, m), EdgeKind::kWrap, nullptr});
    }

    Tables result;
    result.val.resize(unknowns);
    solve(cst, deps, &result.val);
    return memo.emplace(u, std::move(result)).first->second;
  }

  // Tarjan over the dependency graph; components come out after everything
  // they depend on.
  void solve(std::vector<Table>& cst, const std::vector<std::vector<Edge>>& deps,
             std::vector<Table>* val) {
    const size_t n = deps.size();
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<size_t> stack;
    int counter = 0;

    auto finish = [&](const std::vector<size_t>& comp) {
      bool cyclic = comp.size() > 1;
      if (!cyclic)
        for (const Edge& e : deps[comp[0]])
          if (e.src == comp[0]) cyclic = true;
      if (!cyclic) {
        size_t x = comp[0];
        Table t = std::move(cst[x]);
        for (const Edge& e : deps[x]) apply(&t, e, (*val)[e.src]);
        (*val)[x] = std::move(t);
        return;
      }
      std::vector<bool> member(n, false);
      for (size_t x : comp) member[x] = true;
      Table input;
      for (size_t x : comp) {
        for (auto& [k, c] : cst[x]) put(&input, k, c);
        for (const Edge& e : deps[x])
          if (!member[e.src]) apply(&input, e, (*val)[e.src]);
      }
      Table t;
      for (const auto& [k, c] : input)
        put(&t, {k.first, inf_skel()}, Count::infinite());
      for (size_t x : comp) (*val)[x] = t;
    };

    // Iterative Tarjan.
    struct Frame {
      size_t v;
      size_t next_edge;
    };
    for (size_t root = 0; root < n; ++root) {
      if (index[root] >= 0) continue;
      std::vector<Frame> call{{root, 0}};
      index[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = true;
      while (!call.empty()) {
        Frame& f = call.back();
        if (f.next_edge < deps[f.v].size()) {
          size_t w = deps[f.v][f.next_edge++].src;
          if (index[w] < 0) {
            index[w] = low[w] = counter++;
            stack.push_back(w);
            on_stack[w] = true;
            call.push_back({w, 0});
          } else if (on_stack[w]) {
            low[f.v] = std::min(low[f.v], index[w]);
          }
          continue;
        }
        size_t v = f.v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
        if (low[v] == index[v]) {
          std::vector<size_t> comp;
          size_t w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp.push_back(w);
          } while (w != v);
          finish(comp);
        }
      }
    }
  }

  const Table& start_table(std::u32string_view w) {
    if (w.empty()) return e_nt[g.start];
    return get(std::u32string(w)).val[g.start];
  }
};

Oracle::Oracle(const AnnotatedGrammar& g, bool track_skeletons,
               size_t max_entries)
    : g_(g), impl_(std::make_unique<Impl>(g, track_skeletons, max_entries)) {}

Oracle::~Oracle() = default;

std::map<Output, Count> Oracle::outputs(std::u32string_view w) {
  std::map<Output, Count> out;
  if (g_.nonterminals.empty()) return out;
  for (const auto& [k, c] : impl_->start_table(w)) out[k.first] += c;
  return out;
}

std::set<std::string> Oracle::skeletons(std::u32string_view w) {
  if (!impl_->track)
    throw Error(ErrorCode::kInvalidArgument, "oracle built without skeletons");
  std::set<std::string> out;
  if (g_.nonterminals.empty()) return out;
  for (const auto& [k, c] : impl_->start_table(w)) {
    out.insert(c.is_infinite() ? kInfinite : k.second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derived checks

Output ann_of(const AnnotatedString& s) {
  Output o;
  for (size_t i = 0; i < s.size(); ++i)
    if (s[i].annotated()) o.push_back({static_cast<uint32_t>(i + 1), s[i].annotation});
  return o;
}

AnnotatedString annotated_string_of(std::u32string_view w, const Output& o) {
  AnnotatedString s;
  for (Letter a : w) s.push_back({a, kNoAnnotation});
  for (const OutputLetter& l : o) s.at(l.position - 1).annotation = l.annotation;
  return s;
}

std::set<Output> brute_outputs(const AnnotatedGrammar& g,
                               std::u32string_view w) {
  Oracle oracle(g);
  std::set<Output> out;
  for (const auto& [o, c] : oracle.outputs(w))
    if (!c.is_zero()) out.insert(o);
  return out;
}

Count count_derivations(const AnnotatedGrammar& g, const AnnotatedString& s) {
  Oracle oracle(g);
  auto outs = oracle.outputs(str_of(s));
  auto it = outs.find(ann_of(s));
  return it == outs.end() ? Count() : it->second;
}

std::vector<std::u32string> strings_upto(const std::set<Letter>& alphabet,
                                         size_t max_len, size_t cap) {
  std::vector<std::u32string> out{U""};
  size_t level_begin = 0;
  for (size_t len = 1; len <= max_len; ++len) {
    size_t level_end = out.size();
    for (size_t i = level_begin; i < level_end; ++i) {
      for (Letter a : alphabet) {
        if (out.size() >= cap)
          throw Error(ErrorCode::kScaleLimit, "too many strings to enumerate");
        out.push_back(out[i] + a);
      }
    }
    level_begin = level_end;
  }
  return out;
}

UnambiguityVerdict check_unambiguous_upto(Oracle* oracle, size_t max_len) {
  UnambiguityVerdict v;
  v.bound = max_len;
  for (const std::u32string& w : strings_upto(oracle->grammar().alphabet, max_len)) {
    for (const auto& [o, c] : oracle->outputs(w)) {
      if (c.exceeds(1)) {
        v.unambiguous = false;
        v.witness = annotated_string_of(w, o);
        v.witness_count = c;
        return v;
      }
    }
  }
  return v;
}

UnambiguityVerdict check_unambiguous_upto(const AnnotatedGrammar& g,
                                          size_t max_len) {
  Oracle oracle(g);
  return check_unambiguous_upto(&oracle, max_len);
}

namespace {

struct SkelNode {
  bool terminal = false;
  std::vector<size_t> children;
};

}  // namespace

std::vector<std::string> shape_sequence(std::string_view skeleton) {
  std::vector<SkelNode> nodes;
  std::vector<size_t> open;
  size_t root = SIZE_MAX;
  for (char c : skeleton) {
    if (c == '(' || c == '0') {
      nodes.push_back({c == '0', {}});
      size_t id = nodes.size() - 1;
      if (open.empty()) root = id;
      else nodes[open.back()].children.push_back(id);
      if (c == '(') open.push_back(id);
    } else if (c == ')') {
      if (open.empty())
        throw Error(ErrorCode::kInvalidArgument, "unbalanced skeleton");
      open.pop_back();
    } else {
      throw Error(ErrorCode::kInvalidArgument, "malformed skeleton");
    }
  }
  if (root == SIZE_MAX || !open.empty())
    throw Error(ErrorCode::kInvalidArgument, "malformed skeleton");

  std::vector<std::string> seq;
  std::vector<size_t> form{root};
  auto shape = [&] {
    std::string s;
    for (size_t id : form) s += nodes[id].terminal ? '0' : '1';
    return s;
  };
  seq.push_back(shape());
  for (;;) {
    auto it = std::find_if(form.begin(), form.end(),
                           [&](size_t id) { return !nodes[id].terminal; });
    if (it == form.end()) break;
    std::vector<size_t> kids = nodes[*it].children;
    it = form.erase(it);
    form.insert(it, kids.begin(), kids.end());
    seq.push_back(shape());
  }
  return seq;
}

RigidityVerdict check_rigid_upto(const AnnotatedGrammar& g, size_t max_len) {
  RigidityVerdict v;
  v.bound = max_len;
  Oracle oracle(g, true);
  for (const std::u32string& w : strings_upto(g.alphabet, max_len)) {
    std::set<std::string> skels = oracle.skeletons(w);
    if (skels.count(Oracle::kInfinite)) {
      v.rigid = false;
      v.infinite = true;
      v.witness = w;
      return v;
    }
    if (skels.size() > 1) {
      v.rigid = false;
      v.witness = w;
      v.shapes_a = shape_sequence(*skels.begin());
      v.shapes_b = shape_sequence(*std::next(skels.begin()));
      return v;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Bounded languages

std::set<std::vector<Symbol>> bounded_language(const AnnotatedGrammar& g,
                                               size_t max_len,
                                               std::optional<size_t> max_depth,
                                               std::optional<uint32_t> from,
                                               size_t cap) {
  using Lang = std::set<std::vector<Symbol>>;
  const size_t nt = g.nonterminals.size();
  if (nt == 0) return {};
  std::vector<Lang> lang(nt);
  auto concat = [&](const Lang& a, const Lang& b) {
    Lang out;
    for (const auto& x : a)
      for (const auto& y : b) {
        if (x.size() + y.size() > max_len) continue;
        std::vector<Symbol> z = x;
        z.insert(z.end(), y.begin(), y.end());
        out.insert(std::move(z));
      }
    return out;
  };
  for (size_t round = 0; !max_depth || round < *max_depth; ++round) {
    std::vector<Lang> next(nt);
    for (const Rule& r : g.rules) {
      Lang acc{{}};
      for (const Symbol& s : r.rhs) {
        if (s.is_nonterminal()) {
          acc = concat(acc, lang[s.id]);
        } else {
          Symbol t = s;
          acc = concat(acc, Lang{{t}});
        }
        if (acc.empty()) break;
      }
      next[r.lhs].insert(acc.begin(), acc.end());
      if (next[r.lhs].size() > cap)
        throw Error(ErrorCode::kScaleLimit, "bounded language too large");
    }
    if (next == lang) break;
    lang = std::move(next);
  }
  return lang[from.value_or(g.start)];
}

std::vector<bool> brute_nullable(const AnnotatedGrammar& g) {
  std::vector<bool> out(g.nonterminals.size(), false);
  for (uint32_t x = 0; x < g.nonterminals.size(); ++x)
    out[x] = !bounded_language(g, 0, g.nonterminals.size() + 1, x).empty();
  return out;
}

// ---------------------------------------------------------------------------
// Mappings

Letter op_letter(VariableOp op) {
  return 0xF0000 + 2 * op.var + (op.close ? 1 : 0);
}

AnnotatedGrammar extraction_as_cfg(const ExtractionGrammar& h) {
  AnnotatedGrammar g = h.cfg;
  for (Rule& r : g.rules)
    for (Symbol& s : r.rhs)
      if (s.is_op()) {
        Letter a = op_letter({s.id, s.kind == Symbol::Kind::kClose});
        s = Symbol::term(a);
        g.alphabet.insert(a);
      }
  return g;
}

namespace {

RefWord refword_of(const std::vector<Symbol>& s) {
  RefWord r;
  for (const Symbol& x : s) {
    RefSymbol rs;
    if (x.is_op()) {
      rs.is_op = true;
      rs.op = {x.id, x.kind == Symbol::Kind::kClose};
    } else {
      rs.letter = x.terminal.letter;
    }
    r.push_back(rs);
  }
  return r;
}

}  // namespace

MappingVerdict check_functional_upto(const ExtractionGrammar& h,
                                     size_t max_len) {
  MappingVerdict v;
  v.bound = max_len;
  for (const auto& s : bounded_language(h.cfg, max_len)) {
    RefWord r = refword_of(s);
    try {
      mapping_of_refword(r, h.variables);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidRefWord) throw;
      v.functional = false;
      v.invalid_witness = r;
      break;
    }
  }
  return v;
}

MappingVerdict brute_mappings(const ExtractionGrammar& h,
                              std::u32string_view d) {
  const size_t k = h.variables.size();
  MappingVerdict v = check_functional_upto(h, d.size() + 2 * k);
  AnnotatedGrammar g = extraction_as_cfg(h);
  Oracle oracle(g);

  // Interleave the 2k operations into d, each variable opening before it
  // closes.
  std::vector<int> state(k, 0);  // 0 unopened, 1 open, 2 closed
  RefWord word;
  std::u32string letters;
  std::function<void(size_t)> rec = [&](size_t pos) {
    bool all_closed = std::all_of(state.begin(), state.end(),
                                  [](int s) { return s == 2; });
    if (pos == d.size() && all_closed) {
      auto outs = oracle.outputs(letters);
      if (!outs.empty()) v.mappings.insert(mapping_of_refword(word, h.variables));
      return;
    }
    for (uint32_t x = 0; x < k; ++x) {
      if (state[x] == 2) continue;
      VariableOp op{x, state[x] == 1};
      ++state[x];
      word.push_back({true, 0, op});
      letters.push_back(op_letter(op));
      rec(pos);
      letters.pop_back();
      word.pop_back();
      --state[x];
    }
    if (pos < d.size()) {
      word.push_back({false, d[pos], {}});
      letters.push_back(d[pos]);
      rec(pos + 1);
      letters.pop_back();
      word.pop_back();
    }
  };
  rec(0);
  return v;
}

}  // namespace agenum
