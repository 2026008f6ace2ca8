#include <gtest/gtest.h>

#include <map>
#include <tuple>

#include "agenum/error.hpp"
#include "agenum/utf8.hpp"
#include "test_support.hpp"

namespace agenum {
namespace {

using testing::load_grammar;
using testing::u32;

std::set<Output> as_set(const std::vector<Output>& v) {
  return std::set<Output>(v.begin(), v.end());
}

// Records, per (i, j, rule), every split point k that produced a product.
class SplitRecorder : public PreprocessObserver {
 public:
  void on_product(uint32_t i, uint32_t k, uint32_t j, uint32_t rule) override {
    splits[{i, j, rule}].insert(k);
  }
  size_t max_splits() const {
    size_t m = 0;
    for (const auto& [key, ks] : splits) m = std::max(m, ks.size());
    return m;
  }
  std::map<std::tuple<uint32_t, uint32_t, uint32_t>, std::set<uint32_t>> splits;
};

TEST(Evaluate, G1) {
  AnnotatedGrammar g = load_grammar("g1.ag");
  auto outs = evaluate(g, u32("aa"));
  EXPECT_EQ(outs.size(), 4u);
  EXPECT_EQ(as_set(outs), (std::set<Output>{{}, {{1, 0}}, {{2, 0}}, {{1, 0}, {2, 0}}}));
  EXPECT_EQ(evaluate(g, u32("")), (std::vector<Output>{{}}));
  EXPECT_TRUE(evaluate(g, u32("z")).empty());
  EXPECT_TRUE(evaluate(g, u32("aza")).empty());
}

TEST(Evaluate, G2) {
  AnnotatedGrammar g = load_grammar("g2.ag");
  EXPECT_EQ(as_set(evaluate(g, u32("()"))), (std::set<Output>{{}, {{1, 0}}}));
  auto outs = evaluate(g, u32("(())"));
  EXPECT_EQ(outs.size(), 4u);
  EXPECT_EQ(as_set(outs), brute_outputs(g, u32("(())")));
  EXPECT_TRUE(evaluate(g, u32(")(")).empty());
}

TEST(Evaluate, G3) {
  AnnotatedGrammar g = load_grammar("g3.ag");
  uint32_t x = g.find_annotation("x"), y = g.find_annotation("y");
  EXPECT_EQ(as_set(evaluate(g, u32("ab"))), (std::set<Output>{{{1, x}}, {{2, y}}}));
  EXPECT_TRUE(evaluate(g, u32("")).empty());
}

TEST(Evaluate, LimitAndEmptyGrammar) {
  AnnotatedGrammar g = load_grammar("g1.ag");
  EXPECT_EQ(evaluate(g, u32("aaa"), 3).size(), 3u);
  EXPECT_EQ(evaluate(g, u32("aaa"), 0).size(), 0u);
  AnnotatedGrammar empty = parse_grammar("start: S\nS -> A\nA -> A");
  EXPECT_TRUE(evaluate(empty, u32("")).empty());
  EXPECT_TRUE(evaluate(empty, u32("a")).empty());
}

TEST(Evaluate, UnitCyclePropagates) {
  try {
    evaluate(load_grammar("cycle.ag"), u32("a"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnitCycle);
  }
}

TEST(Preprocess, EmptyInputRejected) {
  Grammar2NF g2 = to_2nf(load_grammar("g1.ag"));
  NodeStore store;
  try {
    preprocess(g2, u32(""), &store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(Preprocess, OutputsAreSortedAndLocal) {
  for (const char* f : {"g1.ag", "g2.ag", "g3.ag"}) {
    AnnotatedGrammar g = load_grammar(f);
    for (const auto& w : strings_upto(g.alphabet, 6)) {
      for (const Output& o : evaluate(g, w)) {
        for (size_t i = 0; i < o.size(); ++i) {
          EXPECT_GE(o[i].position, 1u);
          EXPECT_LE(o[i].position, w.size());
          if (i > 0) EXPECT_LT(o[i - 1].position, o[i].position);
        }
      }
    }
  }
}

TEST(Counters, ReportAndGolden) {
  EXPECT_EQ(counters_report({}),
            "{\"baseInits\":0,\"dCopies\":0,\"productCombinations\":0,"
            "\"endInAppends\":0,\"ecsNodes\":0}");
  Evaluation ev(load_grammar("g1.ag"), u32("aa"));
  const OpCounters& c = ev.counters();
  EXPECT_GE(c.product_combinations, 1u);
  // Golden values for the current fill order.
  EXPECT_EQ(counters_report(c),
            "{\"baseInits\":4,\"dCopies\":4,\"productCombinations\":2,"
            "\"endInAppends\":7,\"ecsNodes\":5}");
}

TEST(Counters, MonotoneOnPrefixes) {
  for (const char* f : {"g1.ag", "g2.ag"}) {
    AnnotatedGrammar g = load_grammar(f);
    std::u32string w = f == std::string("g1.ag") ? u32("aaaaaaaa") : u32("()()(())");
    OpCounters prev;
    for (size_t n = 1; n <= w.size(); ++n) {
      Evaluation ev(g, w.substr(0, n));
      const OpCounters& c = ev.counters();
      EXPECT_GE(c.base_inits, prev.base_inits);
      EXPECT_GE(c.d_copies, prev.d_copies);
      EXPECT_GE(c.product_combinations, prev.product_combinations);
      EXPECT_GE(c.endin_appends, prev.endin_appends);
      EXPECT_GE(c.ecs_nodes, prev.ecs_nodes);
      prev = c;
    }
  }
}

TEST(Preprocess, DisjointUnionsOnUnambiguousGrammars) {
  for (const auto& g : testing::unambiguous_corpus(25, 99, 5)) {
    Grammar2NF g2 = to_2nf(g);
    for (const auto& w : strings_upto(g.alphabet, 4)) {
      if (w.empty()) continue;
      NodeStore store;
      PreprocessOptions opt;
      opt.check_disjoint = true;
      EXPECT_EQ(preprocess(g2, w, &store, opt).disjointness_violations, 0u)
          << render_grammar(g);
    }
  }
  // A duplicated rule produces overlapping unions.
  Grammar2NF dup = to_2nf(parse_grammar("S -> 'a' | 'a'"));
  NodeStore store;
  PreprocessOptions opt;
  opt.check_disjoint = true;
  EXPECT_GT(preprocess(dup, u32("a"), &store, opt).disjointness_violations, 0u);
}

TEST(Preprocess, OneSplitPointOnRigidGrammars) {
  for (const char* f : {"g1.ag", "g2.ag"}) {
    AnnotatedGrammar g = load_grammar(f);
    Grammar2NF g2 = to_2nf(g);
    std::u32string w;
    for (int i = 0; i < 12; ++i) w += f == std::string("g1.ag") ? U"a" : U"()";
    w += f == std::string("g1.ag") ? U"" : U"(()(()))";
    SplitRecorder rec;
    PreprocessOptions opt;
    opt.observer = &rec;
    NodeStore store;
    preprocess(g2, w, &store, opt);
    EXPECT_FALSE(rec.splits.empty());
    EXPECT_EQ(rec.max_splits(), 1u) << f;
  }
  // Non-rigid grammars use several split points.
  AnnotatedGrammar cat = parse_grammar("S -> S S | 'a'");
  SplitRecorder rec;
  PreprocessOptions opt;
  opt.observer = &rec;
  NodeStore store;
  preprocess(to_2nf(cat), u32("aaaaa"), &store, opt);
  EXPECT_GT(rec.max_splits(), 1u);
}

TEST(Preprocess, ProductCombinationsCubicBound) {
  for (const auto& g : testing::unambiguous_corpus(30, 7, 4)) {
    Grammar2NF g2 = to_2nf(g);
    std::vector<Letter> letters(g.alphabet.begin(), g.alphabet.end());
    std::mt19937_64 rng(1);
    for (size_t n : {4u, 8u, 16u}) {
      std::u32string w;
      for (size_t i = 0; i < n; ++i) w += letters[rng() % letters.size()];
      NodeStore store;
      auto r = preprocess(g2, w, &store);
      EXPECT_LE(r.counters.product_combinations, n * n * n * g2.base.size());
    }
  }
}

TEST(Evaluate, JsonAndDeterministicOrder) {
  AnnotatedGrammar g = load_grammar("g1.ag");
  auto a = evaluate(g, u32("aaa"));
  auto b = evaluate(g, u32("aaa"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(output_to_json(g, {}), "[]");
  EXPECT_EQ(output_to_json(g, {{1, 0}, {3, 0}}), "[[1,\"x\"],[3,\"x\"]]");
}

TEST(Evaluate, AgreesWithOracleOnSmallCorpus) {
  auto corpus = testing::unambiguous_corpus(40, 2024, 5);
  for (const auto& g : corpus) {
    Oracle oracle(g);
    for (const auto& w : strings_upto(g.alphabet, 5)) {
      auto outs = evaluate(g, w);
      std::set<Output> expected;
      for (const auto& [o, c] : oracle.outputs(w))
        if (!c.is_zero()) expected.insert(o);
      ASSERT_EQ(outs.size(), expected.size()) << render_grammar(g) << encode_utf8(w);
      ASSERT_EQ(as_set(outs), expected) << render_grammar(g);
    }
  }
}

}  // namespace
}  // namespace agenum
