#include "agenum/enumerator.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "agenum/error.hpp"
#include "json.hpp"

namespace agenum {

std::string counters_report(const OpCounters& c) {
  nlohmann::ordered_json j;
  j["baseInits"] = c.base_inits;
  j["dCopies"] = c.d_copies;
  j["productCombinations"] = c.product_combinations;
  j["endInAppends"] = c.endin_appends;
  j["ecsNodes"] = c.ecs_nodes;
  return j.dump();
}

IndexTable::IndexTable(size_t n, size_t nonterminals)
    : n_(n),
      nt_(nonterminals),
      cells_((n + 1) * (n + 1) * nonterminals),
      end_in_((n + 1) * nonterminals) {}

namespace {

std::set<Output> materialize(const NodeStore& store, SetHandle h,
                             size_t* count) {
  std::set<Output> out;
  SetEnumerator e(store, h);
  Output o;
  *count = 0;
  while (e.next(&o)) {
    out.insert(o);
    ++*count;
  }
  return out;
}

class Filler {
 public:
  Filler(const Grammar2NF& g2, std::u32string_view w, NodeStore* store,
         const PreprocessOptions& options)
      : g2_(g2),
        w_(w),
        n_(w.size()),
        store_(store),
        options_(options),
        table_(w.size(), g2.base.nonterminals.size()) {}

  PreprocessResult run() {
    const AnnotatedGrammar& g = g2_.base;
    const size_t start_nodes = store_->node_count();

    std::vector<uint32_t> terminal_rules;
    for (size_t r = 0; r < g.rules.size(); ++r)
      if (g.rules[r].rhs.size() == 1 && g.rules[r].rhs[0].is_terminal())
        terminal_rules.push_back(r);

    for (uint32_t i = 0; i < n_; ++i) {
      for (uint32_t r : terminal_rules) {
        const Terminal& t = g.rules[r].rhs[0].terminal;
        if (t.letter != w_[i]) continue;
        SetHandle h = t.annotated()
                          ? store_->make_singleton({i + 1, t.annotation})
                          : store_->make_eps();
        ++result_.counters.base_inits;
        add(i, i + 1, g.rules[r].lhs, h);
      }
    }

    const auto& units = g2_.units;
    for (uint32_t j = 1; j <= n_; ++j) {
      for (uint32_t k = j; k-- > 0;) {
        for (uint32_t z : units.topo_order) {
          SetHandle h = table_.at(k, j, z);
          if (h.empty()) continue;
          for (uint32_t x : units.d[z]) {
            ++result_.counters.d_copies;
            add(k, j, x, h);
          }
          for (uint32_t r : units.crule[z]) {
            const Rule& rule = g.rules[r];
            uint32_t y = rule.rhs[0].id;
            // Products may append to endIn[j][x], never to endIn[k][y].
            const std::vector<uint32_t>& starts = table_.end_in(k, y);
            for (uint32_t i : starts) {
              ++result_.counters.product_combinations;
              if (options_.observer)
                options_.observer->on_product(i, k, j, r);
              add(i, j, rule.lhs,
                  store_->make_product(table_.at(i, k, y), h));
            }
          }
        }
      }
    }
    result_.root = table_.at(0, n_, g.start);
    result_.counters.ecs_nodes = store_->node_count() - start_nodes;
    return result_;
  }

 private:
  void add(uint32_t i, uint32_t j, uint32_t x, SetHandle h) {
    SetHandle& cell = table_.at(i, j, x);
    bool was_empty = cell.empty();
    if (options_.check_disjoint && !was_empty) {
      size_t ca, cb;
      auto a = materialize(*store_, cell, &ca);
      auto b = materialize(*store_, h, &cb);
      for (const Output& o : b)
        if (a.count(o)) ++result_.disjointness_violations;
    }
    cell = store_->make_union(cell, h);
    if (was_empty && !cell.empty()) {
      table_.end_in(j, x).push_back(i);
      ++result_.counters.endin_appends;
    }
  }

  const Grammar2NF& g2_;
  std::u32string_view w_;
  const uint32_t n_;
  NodeStore* store_;
  const PreprocessOptions& options_;
  IndexTable table_;
  PreprocessResult result_;
};

}  // namespace

PreprocessResult preprocess(const Grammar2NF& g2, std::u32string_view w,
                            NodeStore* store,
                            const PreprocessOptions& options) {
  if (w.empty())
    throw Error(ErrorCode::kEmptyInput, "preprocess requires a nonempty input");
  return Filler(g2, w, store, options).run();
}

Evaluation::Evaluation(const AnnotatedGrammar& g, std::u32string_view w,
                       const PreprocessOptions& options) {
  run(to_2nf(g), w, options);
}

Evaluation::Evaluation(const Grammar2NF& g2, std::u32string_view w,
                       const PreprocessOptions& options) {
  run(g2, w, options);
}

void Evaluation::run(const Grammar2NF& g2, std::u32string_view w,
                     const PreprocessOptions& options) {
  store_ = std::make_unique<NodeStore>();
  auto t0 = std::chrono::steady_clock::now();
  if (w.empty()) {
    // Only the empty annotation can be produced on the empty string.
    result_.root = g2.nullable[g2.base.start] ? store_->make_eps()
                                              : store_->make_empty();
  } else {
    result_ = preprocess(g2, w, store_.get(), options);
  }
  auto t1 = std::chrono::steady_clock::now();
  preprocess_ms_ =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  enumerator_ = std::make_unique<SetEnumerator>(*store_, result_.root);
}

bool Evaluation::next(Output* out) { return enumerator_->next(out); }

uint64_t Evaluation::enumeration_steps() const {
  return enumerator_->steps();
}

std::vector<Output> evaluate(const AnnotatedGrammar& g, std::u32string_view w,
                             std::optional<size_t> limit) {
  Evaluation ev(g, w);
  std::vector<Output> outs;
  Output o;
  while ((!limit || outs.size() < *limit) && ev.next(&o)) outs.push_back(o);
  return outs;
}

std::string output_to_json(const AnnotatedGrammar& g, const Output& o) {
  nlohmann::json arr = nlohmann::json::array();
  for (const OutputLetter& l : o)
    arr.push_back({l.position, g.annotations[l.annotation]});
  return arr.dump();
}

}  // namespace agenum
