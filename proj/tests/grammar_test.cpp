#include <gtest/gtest.h>

#include "agenum/error.hpp"
#include "agenum/grammar.hpp"
#include "agenum/utf8.hpp"
#include "test_support.hpp"

namespace agenum {
namespace {

using testing::load_grammar;

ErrorCode parse_error(const std::string& text) {
  try {
    parse_grammar(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ErrorCode::kInvalidArgument;
}

std::vector<std::string> names_of(const AnnotatedGrammar& g,
                                  const std::vector<bool>& set) {
  std::vector<std::string> out;
  for (size_t i = 0; i < set.size(); ++i)
    if (set[i]) out.push_back(g.nonterminals[i]);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Parse, SingleNonterminalThreeRules) {
  AnnotatedGrammar g = parse_grammar("start: S\nS -> 'a'@x S | 'a' S | _");
  EXPECT_EQ(g.nonterminals.size(), 1u);
  EXPECT_EQ(g.rules.size(), 3u);
  ASSERT_EQ(g.annotations.size(), 1u);
  EXPECT_EQ(g.annotations[0], "x");
  EXPECT_TRUE(g.rules[2].rhs.empty());
  EXPECT_EQ(g.rules[0].rhs[0].terminal.annotation, 0u);
  EXPECT_FALSE(g.rules[1].rhs[0].terminal.annotated());
}

TEST(Parse, NonterminalsInferredFromUse) {
  AnnotatedGrammar g = parse_grammar("start: S\nS -> 'a' T");
  EXPECT_EQ(g.nonterminals.size(), 2u);
  EXPECT_EQ(g.find_nonterminal("T"), 1);
  EXPECT_TRUE(g.rules_by_lhs()[1].empty());
}

TEST(Parse, Errors) {
  EXPECT_EQ(parse_error("S -> 'ab'"), ErrorCode::kSyntax);
  EXPECT_EQ(parse_error("start: S\nstart: T\nS -> 'a'"), ErrorCode::kDuplicateStart);
  EXPECT_EQ(parse_error("S -> 'a"), ErrorCode::kSyntax);
  EXPECT_EQ(parse_error("S 'a'"), ErrorCode::kSyntax);
  EXPECT_EQ(parse_error("S -> 'a' |"), ErrorCode::kSyntax);
  EXPECT_EQ(parse_error("S -> +x 'a'"), ErrorCode::kSyntax);
  try {
    parse_grammar("S -> 'a'\nS -> 'ab'");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("single character"), std::string::npos);
  }
}

TEST(Parse, ExtractionGrammars) {
  ExtractionGrammar h = parse_extraction_grammar("vars: x y\nS -> +x 'a' -x +y -y");
  EXPECT_EQ(h.variables, (std::vector<std::string>{"x", "y"}));
  ASSERT_EQ(h.cfg.rules.size(), 1u);
  EXPECT_EQ(h.cfg.rules[0].rhs[0], Symbol::open(0));
  EXPECT_EQ(h.cfg.rules[0].rhs[2], Symbol::close(0));
  try {
    parse_extraction_grammar("vars: x\nS -> +z 'a' -z");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndeclaredSymbol);
  }
  try {
    parse_extraction_grammar("vars: x\nS -> 'a'@x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSyntax);
  }
}

TEST(Parse, LiteralEscapesAndUnicode) {
  AnnotatedGrammar g = parse_grammar("S -> '\\'' '\\\\' '\\n' 'é' ' '");
  ASSERT_EQ(g.rules[0].rhs.size(), 5u);
  EXPECT_EQ(g.rules[0].rhs[0].terminal.letter, U'\'');
  EXPECT_EQ(g.rules[0].rhs[1].terminal.letter, U'\\');
  EXPECT_EQ(g.rules[0].rhs[2].terminal.letter, U'\n');
  EXPECT_EQ(g.rules[0].rhs[3].terminal.letter, U'é');
  EXPECT_EQ(g.rules[0].rhs[4].terminal.letter, U' ');
  AnnotatedGrammar back = parse_grammar(render_grammar(g));
  EXPECT_EQ(back.rules, g.rules);
}

TEST(Render, RoundTrip) {
  for (const char* f : {"g1.ag", "g2.ag", "g3.ag", "cycle.ag"}) {
    AnnotatedGrammar g = load_grammar(f);
    std::string text = render_grammar(g);
    EXPECT_EQ(render_grammar(parse_grammar(text)), text) << f;
  }
}

TEST(Nullable, Examples) {
  auto g = parse_grammar("start: S\nS -> A B\nA -> _\nB -> 'b'");
  EXPECT_EQ(names_of(g, compute_nullable(g)), (std::vector<std::string>{"A"}));
  g = parse_grammar("start: S\nS -> A B\nA -> _\nB -> _");
  EXPECT_EQ(names_of(g, compute_nullable(g)), (std::vector<std::string>{"A", "B", "S"}));
  g = parse_grammar("start: S\nS -> 'a' S | _");
  EXPECT_EQ(names_of(g, compute_nullable(g)), (std::vector<std::string>{"S"}));
}

TEST(Nullable, AgreesWithBoundedDerivations) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    AnnotatedGrammar g = testing::random_grammar(rng);
    EXPECT_EQ(compute_nullable(g), brute_nullable(g)) << render_grammar(g);
  }
}

TEST(Trim, Examples) {
  auto g = trim_useless(parse_grammar("start: S\nS -> 'a'\nX -> X"));
  EXPECT_EQ(render_grammar(g), "start: S\nS -> 'a'\n");
  g = trim_useless(parse_grammar("start: S\nS -> A\nA -> A"));
  EXPECT_TRUE(g.rules.empty());
  auto g1 = parse_grammar("start: S\nS -> 'a' S | _");
  EXPECT_EQ(render_grammar(trim_useless(g1)), render_grammar(g1));
}

TEST(Trim, PreservesOutputs) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    AnnotatedGrammar g = testing::random_grammar(rng);
    AnnotatedGrammar t = trim_useless(g);
    Oracle a(g), b(t);
    for (const auto& w : strings_upto(g.alphabet, 4)) {
      auto oa = a.outputs(w), ob = b.outputs(w);
      ASSERT_EQ(oa.size(), ob.size()) << render_grammar(g);
      for (auto& [o, c] : oa) {
        ASSERT_TRUE(ob.count(o));
        EXPECT_TRUE(ob.at(o) == c) << render_grammar(g);
      }
    }
  }
}

TEST(Normalize, ShapesAndUnitTable) {
  Grammar2NF g2 = to_2nf(load_grammar("g1.ag"));
  EXPECT_TRUE(is_2nf(g2.base));
  const auto& u = g2.units;
  // Z precedes every X ∈ D[Z].
  std::vector<size_t> rank(g2.base.nonterminals.size());
  for (size_t i = 0; i < u.topo_order.size(); ++i) rank[u.topo_order[i]] = i;
  for (size_t z = 0; z < u.d.size(); ++z)
    for (uint32_t x : u.d[z]) EXPECT_LT(rank[z], rank[x]);
}

TEST(Normalize, LongRulesAndLiftedTerminals) {
  AnnotatedGrammar g = parse_grammar("start: S\nS -> 'a' S 'b' 'c'@x | _");
  Grammar2NF g2 = to_2nf(g);
  EXPECT_TRUE(is_2nf(g2.base));
  for (const Rule& r : g2.base.rules) {
    EXPECT_LE(r.rhs.size(), 2u);
    if (r.rhs.size() == 2) {
      EXPECT_TRUE(r.rhs[0].is_nonterminal());
      EXPECT_TRUE(r.rhs[1].is_nonterminal());
    }
  }
}

TEST(Normalize, UnitCycleRejected) {
  try {
    to_2nf(load_grammar("cycle.ag"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnitCycle);
    std::string m = e.what();
    EXPECT_TRUE(m.find("S -> A -> S") != std::string::npos ||
                m.find("A -> S -> A") != std::string::npos)
        << m;
  }
  // Nullable neighbours close unit cycles too.
  try {
    to_2nf(parse_grammar("start: S\nS -> E S | 'a'\nE -> _"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnitCycle);
  }
}

TEST(Normalize, Idempotent) {
  std::mt19937_64 rng(3);
  std::vector<AnnotatedGrammar> gs = {load_grammar("g1.ag"), load_grammar("g2.ag"),
                                      load_grammar("g3.ag")};
  for (int i = 0; i < 200; ++i) gs.push_back(testing::random_grammar(rng));
  for (const AnnotatedGrammar& g : gs) {
    std::string once;
    try {
      once = render_grammar(to_2nf(g).base);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::kUnitCycle);
      continue;
    }
    std::string twice = render_grammar(to_2nf(parse_grammar(once)).base);
    EXPECT_EQ(once, twice) << render_grammar(g);
  }
}

TEST(Normalize, PreservesDerivationCounts) {
  std::mt19937_64 rng(5);
  int checked = 0;
  while (checked < 120) {
    AnnotatedGrammar g = testing::random_grammar(rng);
    Grammar2NF g2;
    try {
      g2 = to_2nf(g);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    Oracle a(g), b(g2.base);
    for (const auto& w : strings_upto(g.alphabet, 4)) {
      auto oa = a.outputs(w), ob = b.outputs(w);
      ASSERT_EQ(oa.size(), ob.size()) << render_grammar(g);
      for (auto& [o, c] : oa) {
        ASSERT_TRUE(ob.count(o));
        EXPECT_TRUE(ob.at(o) == c) << render_grammar(g) << " on " << encode_utf8(w);
      }
    }
  }
}

TEST(Normalize, PreservesRigidity) {
  for (const char* f : {"g1.ag", "g2.ag"}) {
    AnnotatedGrammar g = load_grammar(f);
    ASSERT_TRUE(check_rigid_upto(g, 6).rigid);
    EXPECT_TRUE(check_rigid_upto(to_2nf(g).base, 6).rigid) << f;
  }
}

TEST(Binarize, ChainsAndLifts) {
  AnnotatedGrammar g = binarize(parse_grammar("start: X\nX -> 'a' B 'c'\nB -> 'b'"));
  // X -> T_a X1, X1 -> B T_c, T_a -> 'a', T_c -> 'c', B -> 'b'.
  EXPECT_EQ(g.rules.size(), 5u);
  EXPECT_TRUE(is_2nf(g));
  Oracle o(g);
  EXPECT_EQ(o.outputs(testing::u32("abc")).size(), 1u);
  EXPECT_TRUE(o.outputs(testing::u32("ab")).empty());
}

TEST(UnitTable, Examples) {
  auto g = parse_grammar("start: S\nS -> A B\nA -> _\nB -> 'b'");
  UnitTable t = build_unit_table(g, compute_nullable(g));
  uint32_t S = g.find_nonterminal("S"), A = g.find_nonterminal("A"),
           B = g.find_nonterminal("B");
  EXPECT_EQ(t.d[B], (std::vector<uint32_t>{S}));
  EXPECT_TRUE(t.d[A].empty());
  EXPECT_EQ(t.crule[B], (std::vector<uint32_t>{0}));

  g = parse_grammar("start: X\nX -> Y\nY -> 'a'");
  t = build_unit_table(g, compute_nullable(g));
  EXPECT_EQ(t.d[1], (std::vector<uint32_t>{0}));
  for (const auto& c : t.crule) EXPECT_TRUE(c.empty());

  g = parse_grammar("start: X\nX -> Y Z\nY -> 'a'\nZ -> 'b'");
  t = build_unit_table(g, compute_nullable(g));
  for (const auto& d : t.d) EXPECT_TRUE(d.empty());
  EXPECT_EQ(t.crule[2], (std::vector<uint32_t>{0}));

  g = parse_grammar("start: X\nX -> Y | 'a'\nY -> X | 'a'");
  try {
    build_unit_table(g, compute_nullable(g));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnitCycle);
  }
}

TEST(UnitTable, G1HasNoCycle) {
  Grammar2NF g2 = to_2nf(load_grammar("g1.ag"));
  EXPECT_TRUE(g2.nullable[g2.base.start]);
  // S -> A S with S nullable puts S into D[A].
  bool found = false;
  for (size_t z = 0; z < g2.units.d.size(); ++z)
    for (uint32_t x : g2.units.d[z])
      if (x == g2.base.start && z != g2.base.start) found = true;
  EXPECT_TRUE(found);
}

TEST(Shape, OfForms) {
  std::vector<Symbol> form = {Symbol::term('a'), Symbol::nonterminal(0),
                              Symbol::term('b', 0)};
  EXPECT_EQ(shape_of(form), "010");
}

}  // namespace
}  // namespace agenum
