#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "agenum/error.hpp"
#include "agenum/utf8.hpp"
#include "test_support.hpp"

namespace agenum {
namespace {

using testing::load_extraction;
using testing::u32;

const std::vector<std::string> kXY = {"x", "y"};

RefSymbol L(char32_t a) { return {false, a, {}}; }
RefSymbol Op(uint32_t var, bool close) { return {true, 0, {var, close}}; }

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kInvalidArgument;
}

TEST(RefWords, Mappings) {
  RefWord r = {Op(0, false), L('a'), L('a'), Op(0, true), Op(1, false),
               L('b'),       L('b'), Op(1, true), L('b')};
  Mapping m = mapping_of_refword(r, kXY);
  EXPECT_EQ(m.at("x"), (Span{1, 3}));
  EXPECT_EQ(m.at("y"), (Span{3, 5}));
  EXPECT_EQ(mapping_of_refword({Op(0, false), Op(0, true), L('a')}, {"x"}).at("x"),
            (Span{1, 1}));
  EXPECT_EQ(error_of([] { mapping_of_refword({Op(0, true), L('a'), Op(0, false)}, {"x"}); }),
            ErrorCode::kInvalidRefWord);
  EXPECT_EQ(error_of([] { mapping_of_refword({Op(0, false), L('a')}, {"x"}); }),
            ErrorCode::kInvalidRefWord);
  EXPECT_EQ(error_of([] {
              mapping_of_refword({Op(0, false), Op(0, false), Op(0, true)}, {"x"});
            }),
            ErrorCode::kInvalidRefWord);
}

TEST(Encode, Examples) {
  Mapping m{{"x", {1, 3}}, {"y", {3, 5}}};
  SpanOutput o = encode_out(m, kXY);
  SpanOutput expected = {{1, {{0, false}}}, {3, {{0, true}, {1, false}}}, {5, {{1, true}}}};
  EXPECT_EQ(o, expected);
  EXPECT_EQ(opset_name(o[1].second, kXY), "{-x,+y}");
  EXPECT_EQ(encode_out({{"x", {2, 2}}}, {"x"}),
            (SpanOutput{{2, {{0, false}, {0, true}}}}));
  // A span reaching the end closes on the end marker's position.
  EXPECT_EQ(encode_out({{"x", {1, 3}}}, {"x"}).back().first, 3u);
}

TEST(Decode, Examples) {
  SpanOutput o = {{1, {{0, false}}}, {3, {{0, true}, {1, false}}}, {5, {{1, true}}}};
  Mapping m = decode_output(o, kXY);
  EXPECT_EQ(m, (Mapping{{"x", {1, 3}}, {"y", {3, 5}}}));
  EXPECT_EQ(error_of([] { decode_output({{1, {{0, false}}}}, {"x"}); }),
            ErrorCode::kMalformedOutput);
  EXPECT_EQ(error_of([] { decode_output({{1, {{0, true}}}, {2, {{0, false}}}}, {"x"}); }),
            ErrorCode::kMalformedOutput);
  EXPECT_EQ(error_of([] { decode_output({{1, {{0, false}, {0, false}}}}, {"x"}); }),
            ErrorCode::kMalformedOutput);
}

TEST(Decode, RoundTripsRandomMappings) {
  std::mt19937_64 rng(8);
  const std::vector<std::string> vars = {"a", "b", "c"};
  for (int i = 0; i < 100; ++i) {
    uint32_t n = 1 + rng() % 8;
    Mapping m;
    for (const auto& x : vars) {
      uint32_t b = 1 + rng() % (n + 1), e = 1 + rng() % (n + 1);
      m[x] = {std::min(b, e), std::max(b, e)};
    }
    SpanOutput o = encode_out(m, vars);
    for (size_t k = 1; k < o.size(); ++k) EXPECT_LT(o[k - 1].first, o[k].first);
    EXPECT_EQ(decode_output(o, vars), m);
  }
}

TEST(OpSets, Names) {
  OpSet ops = {{0, false}, {1, true}};
  EXPECT_EQ(opset_name(ops, kXY), "{+x,-y}");
  EXPECT_EQ(parse_opset_name("{+x,-y}", kXY), ops);
  EXPECT_EQ(parse_opset_name("{-y,+x}", kXY), ops);
  EXPECT_EQ(error_of([] { parse_opset_name("{+z}", kXY); }), ErrorCode::kMalformedOutput);
  EXPECT_EQ(error_of([] { parse_opset_name("+x", kXY); }), ErrorCode::kMalformedOutput);
}

TEST(Translate, SingleVariable) {
  auto h = load_extraction("spanner/simple.xg");
  AnnotatedGrammar g = translate(h);
  for (const Rule& r : g.rules)
    for (const Symbol& s : r.rhs) EXPECT_FALSE(s.is_op());
  auto outs = evaluate(g, u32("a#"));
  ASSERT_EQ(outs.size(), 1u);
  EXPECT_EQ(output_to_json(g, outs[0]), "[[1,\"{+x}\"],[2,\"{-x}\"]]");
  for (const auto& w : strings_upto({U'a', U'#'}, 4))
    if (w != U"a#") EXPECT_TRUE(evaluate(g, w).empty()) << encode_utf8(w);
}

TEST(Translate, EmptyLanguageAndEndMarker) {
  AnnotatedGrammar g = translate(load_extraction("spanner/empty_lang.xg"));
  for (const auto& w : strings_upto({U'a', U'#'}, 4)) EXPECT_TRUE(evaluate(g, w).empty());
  auto h = parse_extraction_grammar("vars: x\nS -> +x '#' -x");
  EXPECT_EQ(error_of([&] { translate(h); }), ErrorCode::kInvalidArgument);
  EXPECT_NO_THROW(translate(h, U'$'));
  EXPECT_EQ(error_of([] {
              enumerate_mappings(load_extraction("spanner/simple.xg"), u32("a#"));
            }),
            ErrorCode::kInvalidArgument);
}

TEST(Translate, PreservesUnambiguity) {
  for (const char* f : {"spanner/simple.xg", "spanner/two_spans.xg", "spanner/nested.xg",
                        "spanner/centre.xg", "spanner/k2.xg"}) {
    auto h = load_extraction(f);
    ASSERT_TRUE(check_unambiguous_upto(extraction_as_cfg(h), 7).unambiguous) << f;
    AnnotatedGrammar g = translate(h);
    EXPECT_TRUE(check_unambiguous_upto(g, 5).unambiguous) << f;
  }
}

TEST(EnumerateMappings, Examples) {
  auto h = parse_extraction_grammar(
      "vars: x y\nS -> +x 'a' 'a' -x +y 'b' 'b' -y 'b'");
  auto ms = enumerate_mappings(h, u32("aabbb"));
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0], (Mapping{{"x", {1, 3}}, {"y", {3, 5}}}));
  EXPECT_EQ(mapping_to_json(ms[0]), "{\"x\":[1,3],\"y\":[3,5]}");
  EXPECT_EQ(brute_mappings(h, u32("aabbb")).mappings, std::set<Mapping>(ms.begin(), ms.end()));
  EXPECT_TRUE(enumerate_mappings(h, u32("aabb")).empty());

  EXPECT_EQ(enumerate_mappings(load_extraction("spanner/k2.xg"), u32("a")).size(), 4u);
  auto exp3 = enumerate_mappings(load_extraction("spanner/exp3.xg"), u32("a"));
  EXPECT_EQ(exp3.size(), 8u);
  EXPECT_EQ(std::set<Mapping>(exp3.begin(), exp3.end()).size(), 8u);
  EXPECT_EQ(enumerate_mappings(load_extraction("spanner/k2.xg"), u32("a"), 3).size(), 3u);
}

TEST(EnumerateMappings, MatchesBruteForceOnCorpus) {
  auto files = testing::data_files("spanner", ".xg");
  EXPECT_GE(files.size(), 21u);
  for (const auto& f : files) {
    auto h = load_extraction(f);
    std::set<Letter> sigma = h.cfg.alphabet;
    if (sigma.empty()) sigma.insert(U'a');
    for (const auto& d : strings_upto(sigma, 3)) {
      auto brute = brute_mappings(h, d);
      EXPECT_TRUE(brute.functional) << f;
      auto got = enumerate_mappings(h, d);
      std::set<Mapping> as_set(got.begin(), got.end());
      EXPECT_EQ(as_set.size(), got.size()) << f << " duplicates on " << encode_utf8(d);
      EXPECT_EQ(as_set, brute.mappings) << f << " on '" << encode_utf8(d) << "'";
    }
  }
}

TEST(Functionality, Check) {
  auto bad = parse_extraction_grammar("vars: x\nS -> +x 'a' | +x 'a' -x");
  auto v = check_functional_upto(bad, 3);
  EXPECT_FALSE(v.functional);
  EXPECT_EQ(v.bound, 3u);
  EXPECT_TRUE(check_functional_upto(load_extraction("spanner/nested.xg"), 6).functional);
}

}  // namespace
}  // namespace agenum
