#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "propvec/corpus.hpp"
#include "../test_util.hpp"

using namespace propvec;

TEST_CASE("parse_token splits surface, lemma and tag slots") {
  Token t = parse_token("הסתכלה|הסתכל|VB.F.S.3.PAST", 1, 1);
  CHECK(t.surface == "הסתכלה");
  CHECK(t.lemma == "הסתכל");
  CHECK(t.tag.slots == std::vector<std::string>{"VB", "F", "S", "3", "PAST"});

  Token cat = parse_token("cat|cat|NN.S", 1, 1);
  CHECK(cat.lemma == "cat");
  CHECK(cat.tag.arity() == 2);
}

TEST_CASE("parse_token rejects malformed tokens") {
  CHECK_THROWS_WITH(parse_token("a|b", 3, 2),
                    Catch::Matchers::ContainsSubstring("expected 3 fields, got 2") &&
                        Catch::Matchers::ContainsSubstring("line 3"));
  CHECK_THROWS(parse_token("a|b|c|d", 1, 1));
  CHECK_THROWS(parse_token("|b|X", 1, 1));         // empty surface
  CHECK_THROWS(parse_token("a||X", 1, 1));         // empty lemma
  CHECK_THROWS(parse_token("a|b|", 1, 1));         // empty tag
  CHECK_THROWS(parse_token("a|b|X..Y", 1, 1));     // empty slot
  CHECK_THROWS(parse_token("a.c|b|X", 1, 1));      // '.' in surface
}

TEST_CASE("token round-trips through its text form") {
  std::mt19937_64 gen(7);
  const std::string alpha = "abcdefXYZ123";
  auto word = [&] {
    std::string s(1 + uniform_below(gen, 6), 'a');
    for (auto& c : s) c = alpha[uniform_below(gen, alpha.size())];
    return s;
  };
  for (int i = 0; i < 200; ++i) {
    Token t;
    t.surface = word();
    t.lemma = word();
    for (size_t j = 0, n = 1 + uniform_below(gen, 4); j < n; ++j)
      t.tag.slots.push_back(word());
    std::string text = t.text();
    CHECK(parse_token(text, 1, 1) == t);
    CHECK(parse_token(text, 1, 1).text() == text);
  }
}

TEST_CASE("parse_corpus yields sentences in order and skips blank lines") {
  std::istringstream in("a|a|X b|b|Y\n\n   \nc|c|Z\n");
  auto corpus = read_corpus(in);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].size() == 2);
  CHECK(corpus[1][0].surface == "c");

  std::istringstream bad("a|a|X\nbad|token\n");
  CHECK_THROWS_WITH(read_corpus(bad),
                    Catch::Matchers::ContainsSubstring("line 2"));
}

TEST_CASE("build_vocab filters by min_count and records analyses") {
  auto corpus = testutil::corpus_from("a|a|X.Y b|b|X.Z\na|a|X.Y\n");

  auto v2 = build_vocab(corpus, 2);
  REQUIRE(v2.size() == 1);
  CHECK(v2.word(0).surface == "a");
  CHECK(v2.word(0).count == 2);
  REQUIRE(v2.word(0).analyses.size() == 1);
  CHECK(v2.word(0).analyses[0].lemma == "a");
  CHECK(v2.word(0).analyses[0].tag.text() == "X.Y");

  auto v1 = build_vocab(corpus, 1);
  CHECK(v1.size() == 2);
  CHECK(v1.word_id("a").has_value());
  CHECK(v1.word_id("b").has_value());
}

TEST_CASE("a surface seen with two tags gets two analyses") {
  auto v = testutil::vocab_from("ran|run|VB.PAST ran|run|VB.PART\n");
  REQUIRE(v.size() == 1);
  CHECK(v.word(0).analyses.size() == 2);
}

TEST_CASE("empty corpus is an error") {
  CHECK_THROWS_WITH(build_vocab({}, 1),
                    Catch::Matchers::ContainsSubstring("no sentences"));
}

TEST_CASE("word ids are dense and ordered by count then surface") {
  auto v = testutil::vocab_from("b|b|X b|b|X c|c|X a|a|X a|a|X z|z|X\n");
  // counts: a=2, b=2, c=1, z=1
  CHECK(v.word(0).surface == "a");
  CHECK(v.word(1).surface == "b");
  CHECK(v.word(2).surface == "c");
  CHECK(v.word(3).surface == "z");
  for (uint32_t i = 0; i < v.size(); ++i)
    CHECK(*v.word_id(v.word(i).surface) == i);
}

TEST_CASE("property keys are namespaced and registered for retained words") {
  auto v = testutil::vocab_from("walk|walk|VB walked|walk|VB.PAST\n");
  CHECK(v.property_id("W:walk").has_value());
  CHECK(v.property_id("W:walked").has_value());
  CHECK(v.property_id("L:walk").has_value());
  CHECK(v.property_id("M:VB").has_value());
  CHECK(v.property_id("M:VB.PAST").has_value());
  // surface and identical lemma text live in different namespaces
  CHECK(*v.property_id("W:walk") != *v.property_id("L:walk"));
  for (uint32_t i = 0; i < v.n_properties(); ++i)
    CHECK(*v.property_id(v.property_key(i)) == i);
}

TEST_CASE("extract_properties returns configured in-vocabulary ids") {
  auto v = testutil::vocab_from("הסתכלה|הסתכל|VB.F.S.3.PAST\n");
  Token t = parse_token("הסתכלה|הסתכל|VB.F.S.3.PAST", 1, 1);

  auto wlm = PropertyConfig::from_string("WLM");
  auto ids = extract_properties(t, wlm, v);
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] == *v.property_id("W:הסתכלה"));
  CHECK(ids[1] == *v.property_id("L:הסתכל"));
  CHECK(ids[2] == *v.property_id("M:VB.F.S.3.PAST"));

  auto l = PropertyConfig::from_string("L");
  CHECK(extract_properties(t, l, v) ==
        std::vector<uint32_t>{*v.property_id("L:הסתכל")});

  Token oov = parse_token("missing|missing|X", 1, 1);
  auto w = PropertyConfig::from_string("W");
  CHECK(extract_properties(oov, w, v).empty());

  // purity: same inputs, same ids
  CHECK(extract_properties(t, wlm, v) == extract_properties(t, wlm, v));
}

TEST_CASE("ngram_ids enumerates wrapped substrings plus the whole word") {
  uint64_t buckets = 1u << 20;
  auto got = ngram_ids("cat", 3, 3, buckets);
  std::vector<uint32_t> want;
  for (auto g : {"<ca", "cat", "at>", "<cat>"})
    want.push_back(uint32_t(fnv1a32(g) % buckets));
  std::sort(want.begin(), want.end());
  want.erase(std::unique(want.begin(), want.end()), want.end());
  CHECK(got == want);
}

TEST_CASE("ngram_ids of a short word is just the wrapped whole word") {
  uint64_t buckets = 1u << 20;
  auto got = ngram_ids("a", 3, 3, buckets);
  CHECK(got == std::vector<uint32_t>{uint32_t(fnv1a32("<a>") % buckets)});
}

TEST_CASE("ngram bucket collisions are permitted") {
  auto got = ngram_ids("abcdef", 3, 4, 1);
  CHECK(got == std::vector<uint32_t>{0});
}

TEST_CASE("ngram_ids validates inputs") {
  CHECK_THROWS(ngram_ids("", 3, 3, 10));
  CHECK_THROWS(ngram_ids("abc", 0, 3, 10));
  CHECK_THROWS(ngram_ids("abc", 4, 3, 10));
  CHECK_THROWS(ngram_ids("abc", 3, 3, 0));
}

TEST_CASE("negative_dist follows count^alpha") {
  SECTION("symmetric counts") {
    auto v = testutil::vocab_from("a|a|X b|b|X\n");
    auto d = negative_dist(v, 0.75);
    CHECK(d.probability(0) == Catch::Approx(0.5).margin(1e-12));
    CHECK(d.probability(1) == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("16 vs 1 at alpha 0.75") {
    std::string text;
    for (int i = 0; i < 16; ++i) text += "a|a|X ";
    text += "b|b|X\n";
    auto v = testutil::vocab_from(text);
    auto d = negative_dist(v, 0.75);
    CHECK(d.probability(*v.word_id("a")) == Catch::Approx(8.0 / 9.0).margin(1e-12));
    CHECK(d.probability(*v.word_id("b")) == Catch::Approx(1.0 / 9.0).margin(1e-12));
  }
  SECTION("alpha 1 is the plain unigram") {
    auto v = testutil::vocab_from("a|a|X a|a|X a|a|X b|b|X\n");
    auto d = negative_dist(v, 1.0);
    CHECK(d.probability(*v.word_id("a")) == Catch::Approx(0.75).margin(1e-12));
  }
  SECTION("guards") {
    auto v = testutil::vocab_from("a|a|X\n");
    CHECK_THROWS(negative_dist(v, 0.0));
    CHECK_THROWS(negative_dist(Vocabulary{}, 0.75));
  }
}

TEST_CASE("sampling distribution sums to one and covers all words") {
  std::mt19937_64 gen(3);
  std::string text;
  for (int w = 0; w < 30; ++w) {
    std::string word(1, char('a' + w % 26));
    word += std::to_string(w);
    for (size_t i = 0, n = 1 + uniform_below(gen, 20); i < n; ++i)
      text += word + "|" + word + "|X ";
  }
  text += "\n";
  auto v = testutil::vocab_from(text);
  auto d = negative_dist(v, 0.75);
  double sum = 0;
  for (uint32_t i = 0; i < v.size(); ++i) {
    CHECK(d.probability(i) > 0);
    sum += d.probability(i);
  }
  CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  for (int i = 0; i < 1000; ++i) CHECK(d.sample(gen) < v.size());
}

TEST_CASE("keep_probability follows min(1, sqrt(t/f) + t/f)") {
  // f == t: sqrt(1) + 1 capped at 1
  CHECK(keep_probability(1, 10000, 1e-4) == 1.0);
  // f == 100t
  CHECK(keep_probability(100, 10000, 1e-4) == Catch::Approx(0.11).margin(1e-12));
  CHECK_THROWS(keep_probability(1, 10, 0.0));
  CHECK_THROWS(keep_probability(0, 10, 1e-4));
  CHECK_THROWS(keep_probability(11, 10, 1e-4));
}
