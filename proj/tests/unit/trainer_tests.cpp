#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "propvec/eval_semantic.hpp"
#include "propvec/synth.hpp"
#include "propvec/trainer.hpp"
#include "../test_util.hpp"

using namespace propvec;

namespace {

TrainConfig quiet_config() {
  TrainConfig tc;
  tc.progress = false;
  tc.min_count = 1;
  return tc;
}

const auto keep_all = [](size_t) { return true; };

}  // namespace

TEST_CASE("contexts of a one-token sentence is empty") {
  std::mt19937_64 gen(1);
  CHECK(contexts(1, 2, false, gen, keep_all).empty());
  CHECK(contexts(0, 2, false, gen, keep_all).empty());
}

TEST_CASE("window 1 around the middle of three tokens") {
  std::mt19937_64 gen(1);
  auto pairs = contexts(3, 1, false, gen, keep_all);
  std::vector<std::pair<uint32_t, uint32_t>> mid;
  for (auto p : pairs)
    if (p.first == 1) mid.push_back(p);
  REQUIRE(mid.size() == 2);
  CHECK(mid[0] == std::pair<uint32_t, uint32_t>{1, 0});
  CHECK(mid[1] == std::pair<uint32_t, uint32_t>{1, 2});
}

TEST_CASE("sentence-start focus only sees right contexts") {
  std::mt19937_64 gen(1);
  auto pairs = contexts(5, 2, true, gen, keep_all);
  for (auto [f, c] : pairs) {
    if (f == 0) CHECK(c > 0);
    CHECK(c <= f + 2);
    CHECK(f <= c + 2);
    CHECK(f != c);
  }
  // fixed window: focus 2 sees exactly 4 contexts
  size_t mid = 0;
  for (auto p : pairs) mid += p.first == 2;
  CHECK(mid == 4);
}

TEST_CASE("subsampling removes positions before pairing") {
  std::mt19937_64 gen(1);
  // keep only positions 0 and 2; window 1 must bridge the removed middle
  auto pairs = contexts(3, 1, false, gen, [](size_t i) { return i != 1; });
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<uint32_t, uint32_t>{0, 2});
  CHECK(pairs[1] == std::pair<uint32_t, uint32_t>{2, 0});
}

TEST_CASE("pair count never exceeds 2*window per position") {
  std::mt19937_64 gen(7);
  for (int iter = 0; iter < 50; ++iter) {
    size_t n = uniform_below(gen, 30);
    uint32_t window = 1 + uint32_t(uniform_below(gen, 4));
    auto pairs = contexts(n, window, false, gen, keep_all);
    CHECK(pairs.size() <= 2 * size_t(window) * n);
  }
}

TEST_CASE("learning rate decays linearly to a floor") {
  CHECK(learning_rate(0.05, 0, 100) == Catch::Approx(0.05));
  CHECK(learning_rate(0.05, 50, 100) == Catch::Approx(0.025));
  CHECK(learning_rate(0.05, 100, 100) == Catch::Approx(0.05 * 1e-6));
  CHECK(learning_rate(0.05, 1000, 100) == Catch::Approx(0.05 * 1e-6));
  // within one sentence of granularity during a real run
  for (uint64_t done : {1ull, 17ull, 63ull})
    CHECK(learning_rate(0.1, done, 64) ==
          Catch::Approx(0.1 * (1.0 - double(done) / 64.0)).margin(1e-12));
}

TEST_CASE("single-worker training is bit-reproducible") {
  std::string text;
  for (int i = 0; i < 60; ++i)
    text += "a|a|X b|b|Y c|c|Z d|d|X e|e|Y\n";
  auto corpus = testutil::corpus_from(text);
  auto tc = quiet_config();
  tc.dim = 16;
  tc.epochs = 2;
  tc.seed = 5;
  auto pc = PropertyConfig::from_string("WLM");
  auto [m1, s1] = train(corpus, tc, pc);
  auto [m2, s2] = train(corpus, tc, pc);
  CHECK(m1 == m2);
  CHECK(s1.tokens_processed == s2.tokens_processed);
  CHECK(s1.pairs == s2.pairs);
  for (float x : m1.input) REQUIRE(std::isfinite(x));
  for (float x : m1.output) REQUIRE(std::isfinite(x));

  tc.seed = 6;
  auto [m3, s3] = train(corpus, tc, pc);
  CHECK(m1 != m3);
}

TEST_CASE("train echoes the requested settings in its stats") {
  std::string text;
  for (int i = 0; i < 30; ++i) text += "a|a|X b|b|Y c|c|Z\n";
  auto tc = quiet_config();
  tc.window = 2;
  tc.dim = 200;
  tc.epochs = 1;
  auto [model, stats] = train(testutil::corpus_from(text), tc,
                              PropertyConfig::from_string("W"));
  CHECK(stats.window == 2);
  CHECK(stats.dim == 200);
  CHECK(model.dim == 200);
  CHECK(stats.tokens_processed == 90);
  CHECK(stats.final_lr == Catch::Approx(tc.lr_start * 1e-6));
}

TEST_CASE("training errors are explicit") {
  auto tc = quiet_config();
  CHECK_THROWS_WITH(train({}, tc, PropertyConfig::from_string("W")),
                    Catch::Matchers::ContainsSubstring("no sentences"));
  tc.min_count = 100;
  auto corpus = testutil::corpus_from("a|a|X b|b|Y\n");
  CHECK_THROWS_WITH(train(corpus, tc, PropertyConfig::from_string("W")),
                    Catch::Matchers::ContainsSubstring("empty vocabulary"));
}

TEST_CASE("with no negatives the positive scores grow") {
  std::string text;
  for (int i = 0; i < 40; ++i) text += "x|x|X y|y|Y\n";
  auto corpus = testutil::corpus_from(text);
  auto tc = quiet_config();
  tc.negatives = 0;
  tc.dim = 8;
  tc.epochs = 5;
  tc.window = 1;
  tc.t = 1.0;  // no subsampling
  auto pc = PropertyConfig::from_string("W");
  auto [model, stats] = train(corpus, tc, pc);
  CHECK(stats.pairs > 0);

  Token x = parse_token("x|x|X", 1, 1);
  auto props = extract_properties(x, pc, model.vocab);
  // fresh model scores 0; trained score of the observed pair must be higher
  CHECK(model.score(props, *model.vocab.word_id("y")) > 0.0f);
}

TEST_CASE("a word is drawn toward its only context's output row") {
  std::string text;
  for (int i = 0; i < 50; ++i) text += "x|x|X y|y|Y\nz|z|Z w|w|W\n";
  auto corpus = testutil::corpus_from(text);
  auto tc = quiet_config();
  tc.dim = 12;
  tc.epochs = 4;
  tc.window = 1;
  tc.t = 1.0;
  tc.seed = 3;
  auto pc = PropertyConfig::from_string("W");
  auto [model, stats] = train(corpus, tc, pc);
  Token x = parse_token("x|x|X", 1, 1);
  auto props = extract_properties(x, pc, model.vocab);
  float with_partner = model.score(props, *model.vocab.word_id("y"));
  CHECK(with_partner > model.score(props, *model.vocab.word_id("z")));
  CHECK(with_partner > model.score(props, *model.vocab.word_id("w")));
}

TEST_CASE("co-occurring words end up with similar composed vectors") {
  // two clusters whose members only appear together
  std::string text;
  for (int i = 0; i < 120; ++i)
    text += i % 2 ? "a1|a1|X a2|a2|X a3|a3|X\n" : "b1|b1|X b2|b2|X b3|b3|X\n";
  auto corpus = testutil::corpus_from(text);
  auto tc = quiet_config();
  tc.dim = 16;
  tc.epochs = 8;
  tc.t = 1.0;
  tc.seed = 11;
  auto [model, stats] = train(corpus, tc, PropertyConfig::from_string("W"));
  auto wv = word_vectors(model);
  auto row = [&](const char* w) { return wv.row(*wv.find(w)); };
  CHECK(cosine(row("a1"), row("a2")) > cosine(row("a1"), row("b1")));
  CHECK(cosine(row("a1"), row("a3")) > cosine(row("a1"), row("b2")));
}

TEST_CASE("ngrams mode trains and represents any surface") {
  std::string text;
  for (int i = 0; i < 60; ++i)
    text += "walking|walk|VB.PRES hiking|hike|VB.PRES\nwalked|walk|VB.PAST "
            "hiked|hike|VB.PAST\n";
  auto corpus = testutil::corpus_from(text);
  auto tc = quiet_config();
  tc.dim = 16;
  tc.epochs = 3;
  tc.t = 1.0;
  auto pc = PropertyConfig::from_string("ngrams");
  pc.buckets = 4096;
  auto [model, stats] = train(corpus, tc, pc);
  CHECK(model.input.size() == 4096 * 16);
  CHECK(stats.pairs > 0);

  // never-seen surface still composes via its character n-grams
  AnnotatedWord unseen = parse_token("walkinger|walk|VB", 1, 1);
  auto v = represent(unseen, model);
  REQUIRE(v.has_value());
  // and shares buckets with the related seen form
  auto wv = word_vectors(model);
  CHECK(cosine(*v, wv.row(*wv.find("walking"))) >
        cosine(*v, wv.row(*wv.find("hiked"))));
}

TEST_CASE("a single-word vocabulary cannot draw negatives and still trains") {
  std::string text;
  for (int i = 0; i < 10; ++i) text += "a|a|X a|a|X a|a|X\n";
  auto tc = quiet_config();
  tc.negatives = 3;  // every draw collides with the context and is skipped
  tc.epochs = 1;
  tc.dim = 4;
  tc.t = 1.0;
  auto [model, stats] = train(testutil::corpus_from(text), tc,
                              PropertyConfig::from_string("W"));
  CHECK(stats.pairs > 0);
}

TEST_CASE("multi-worker training stays close to the single-worker result") {
  LanguageSpec spec;
  spec.n_clusters = 4;
  spec.lemmas_per_cluster = 12;
  spec.seed = 21;
  auto lex = gen_language(spec);
  auto gen_corp = gen_corpus(lex, spec, 8000, 8, 77);
  std::istringstream in(gen_corp.text);
  auto corpus = read_corpus(in);
  EvalSetParams ep;
  ep.n_common_targets = 30;
  ep.n_rare_targets = 10;
  ep.rare_lo = 5;
  auto sets = gen_eval_sets(lex, gen_corp, ep, 31);

  auto tc = quiet_config();
  tc.dim = 32;
  tc.epochs = 3;
  tc.min_count = 5;
  tc.seed = 9;
  auto pc = PropertyConfig::from_string("WL");
  tc.workers = 1;
  auto [m1, s1] = train(corpus, tc, pc);
  tc.workers = 4;
  auto [m4, s4] = train(corpus, tc, pc);

  double a1 = ag_score(m1, sets.triples_common).score;
  double a4 = ag_score(m4, sets.triples_common).score;
  INFO("single=" << a1 << " multi=" << a4);
  CHECK(std::abs(a1 - a4) < 0.05);
}
