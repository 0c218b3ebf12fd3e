#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <sys/wait.h>

#include "propvec/corpus.hpp"
#include "propvec/util.hpp"
#include "propvec/vectors.hpp"
#include "../test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string binary() {
  const char* bin = std::getenv("PROPVEC_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

RunResult run(const std::string& args) {
  static int counter = 0;
  testutil::TempDir io;
  auto out_path = io.file("out" + std::to_string(counter));
  auto err_path = io.file("err" + std::to_string(counter));
  ++counter;
  std::string cmd =
      binary() + " " + args + " >" + out_path + " 2>" + err_path;
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = propvec::read_file(out_path);
  r.err = propvec::read_file(err_path);
  return r;
}

// One shared small synthetic workspace: synth + train are slow enough that
// the pipeline tests reuse it.
struct Workspace {
  testutil::TempDir dir;
  std::string synth_dir, model, vec;

  Workspace() {
    synth_dir = dir.file("synth");
    auto r = run("synth --out-dir " + synth_dir +
                 " --clusters 4 --lemmas 12 --sentences 4000 --sentence-len 8"
                 " --rare-targets 6 --common-targets 10 --morph-targets 12"
                 " --seed 11");
    REQUIRE(r.exit_code == 0);
    model = dir.file("m.model");
    vec = dir.file("m.vec");
    auto t = run("train --input " + synth_dir + "/corpus.txt --props WLM" +
                 " --output " + dir.file("m") +
                 " --dim 24 --epochs 2 --quiet --seed 3");
    REQUIRE(t.exit_code == 0);
  }
};

Workspace& workspace() {
  static Workspace ws;
  return ws;
}

}  // namespace

TEST_CASE("help exits 0 and documents every subcommand") {
  auto r = run("--help");
  CHECK(r.exit_code == 0);
  for (auto* sub : {"train", "eval-sem", "eval-morph", "nn", "synth"})
    CHECK(r.out.find(sub) != std::string::npos);
  for (auto* sub : {"train", "eval-sem", "eval-morph", "nn", "synth"}) {
    auto h = run(std::string(sub) + " --help");
    CHECK(h.exit_code == 0);
  }
  auto h = run("train --help");
  for (auto* flag : {"--input", "--props", "--output", "--dim", "--window",
                     "--neg", "--epochs", "--lr", "--min-count", "--t",
                     "--threads", "--seed", "--compose", "--minn", "--maxn",
                     "--buckets", "--fixed-window"})
    CHECK(h.out.find(flag) != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  auto& ws = workspace();
  auto r = run("train --input x --props Q --output y");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("ngrams") != std::string::npos);  // lists valid values

  CHECK(run("").exit_code == 2);                      // missing subcommand
  CHECK(run("train --props W").exit_code == 2);       // missing required
  CHECK(run("eval-morph --model " + ws.model).exit_code == 2);  // neither
  CHECK(run("eval-morph --model " + ws.model + " --sample 5 --targets x")
            .exit_code == 2);                         // both
}

TEST_CASE("runtime errors exit 1") {
  auto r = run("eval-sem --model /nonexistent.model --triples /nonexistent.tsv");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("error") != std::string::npos);
  CHECK(run("train --input /nonexistent.txt --props W --output /tmp/x --quiet")
            .exit_code == 1);
}

TEST_CASE("synth writes the five dataset files deterministically") {
  auto& ws = workspace();
  for (auto* name : {"corpus.txt", "triples_common.tsv", "triples_rare.tsv",
                     "targets_common.txt", "targets_rare.txt"})
    CHECK(fs::exists(fs::path(ws.synth_dir) / name));

  testutil::TempDir other;
  auto again = other.file("synth2");
  auto r = run("synth --out-dir " + again +
               " --clusters 4 --lemmas 12 --sentences 4000 --sentence-len 8"
               " --rare-targets 6 --common-targets 10 --morph-targets 12"
               " --seed 11");
  REQUIRE(r.exit_code == 0);
  for (auto* name : {"corpus.txt", "triples_common.tsv", "triples_rare.tsv",
                     "targets_common.txt", "targets_rare.txt"})
    CHECK(propvec::read_file((fs::path(ws.synth_dir) / name).string()) ==
          propvec::read_file((fs::path(again) / name).string()));
}

TEST_CASE("fusional synth keeps lemmas out of surfaces") {
  testutil::TempDir dir;
  auto out = dir.file("fus");
  auto r = run("synth --out-dir " + out +
               " --clusters 4 --lemmas 8 --sentences 1000 --sentence-len 6"
               " --rare-targets 2 --common-targets 4 --morph-targets 4"
               " --common-min 30 --rare-min 2 --fusional --seed 2");
  REQUIRE(r.exit_code == 0);
  auto corpus = propvec::read_corpus_file(out + "/corpus.txt");
  for (const auto& sent : corpus)
    for (const auto& tok : sent)
      CHECK(tok.surface.find(tok.lemma) == std::string::npos);
}

TEST_CASE("train writes a model and a vector file") {
  auto& ws = workspace();
  CHECK(fs::exists(ws.model));
  CHECK(fs::exists(ws.vec));
  auto wv = propvec::load_word_vectors_file(ws.vec);
  CHECK(wv.dim == 24);
  CHECK(wv.size() > 50);
}

TEST_CASE("eval-sem prints machine-readable key=value output") {
  auto& ws = workspace();
  auto r = run("eval-sem --model " + ws.model + " --triples " + ws.synth_dir +
               "/triples_common.tsv");
  REQUIRE(r.exit_code == 0);
  double score;
  unsigned long long covered, skipped;
  REQUIRE(std::sscanf(r.out.c_str(), "score=%lf covered=%llu skipped=%llu",
                      &score, &covered, &skipped) == 3);
  CHECK(score >= 0.0);
  CHECK(score <= 1.0);
  CHECK(covered > 0);
}

TEST_CASE("eval-morph runs both sampling protocols") {
  auto& ws = workspace();
  auto r = run("eval-morph --model " + ws.model + " --k 5 --targets " +
               ws.synth_dir + "/targets_rare.txt");
  REQUIRE(r.exit_code == 0);
  double ms;
  size_t k, n;
  REQUIRE(std::sscanf(r.out.c_str(), "morphosim=%lf k=%zu n=%zu", &ms, &k,
                      &n) == 3);
  CHECK(k == 5);
  CHECK(n >= 1);
  CHECK(ms >= 0.0);
  CHECK(ms <= 1.0);

  auto s1 = run("eval-morph --model " + ws.model + " --k 5 --sample 10 --seed 4");
  auto s2 = run("eval-morph --model " + ws.model + " --k 5 --sample 10 --seed 4");
  REQUIRE(s1.exit_code == 0);
  CHECK(s1.out == s2.out);  // deterministic given the seed

  testutil::TempDir dir;
  auto per_word = dir.file("per_word.tsv");
  auto p = run("eval-morph --model " + ws.model +
               " --k 5 --sample 10 --seed 4 --per-word " + per_word);
  REQUIRE(p.exit_code == 0);
  auto lines = propvec::split(propvec::read_file(per_word), '\n');
  CHECK(lines.size() >= 10);  // 10 entries + trailing empty
}

TEST_CASE("nn prints rank, surface, cosine, lemma and tag") {
  auto& ws = workspace();
  auto wv = propvec::load_word_vectors_file(ws.vec);
  std::string word = wv.words.front();
  auto r = run("nn --model " + ws.model + " --word " + word + " --k 3");
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string line;
  double prev = 2.0;
  size_t count = 0;
  while (std::getline(lines, line)) {
    auto cols = propvec::split(line, '\t');
    REQUIRE(cols.size() == 5);
    CHECK(cols[0] == std::to_string(++count));
    CHECK(std::string(cols[1]) != word);  // no self-neighbor
    double c = std::stod(std::string(cols[2]));
    CHECK(c <= prev);  // non-increasing cosines
    prev = c;
    CHECK(!cols[3].empty());
    CHECK(!cols[4].empty());
  }
  CHECK(count == 3);

  auto bad = run("nn --model " + ws.model + " --word zzzznotaword --k 3");
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("unknown word") != std::string::npos);
}

TEST_CASE("flags can come from PROPVEC_ environment variables") {
  auto& ws = workspace();
  testutil::TempDir dir;
  setenv("PROPVEC_DIM", "8", 1);
  auto r = run("train --input " + ws.synth_dir +
               "/corpus.txt --props L --output " + dir.file("env") +
               " --epochs 1 --quiet");
  unsetenv("PROPVEC_DIM");
  REQUIRE(r.exit_code == 0);
  auto wv = propvec::load_word_vectors_file(dir.file("env") + ".vec");
  CHECK(wv.dim == 8);
}

TEST_CASE("failed commands leave no partial output files") {
  testutil::TempDir dir;
  // unwritable output directory: train must fail without artifacts
  auto& ws = workspace();
  auto r = run("train --input " + ws.synth_dir +
               "/corpus.txt --props W --output " + dir.file("no/such/dir/x") +
               " --epochs 1 --quiet");
  CHECK(r.exit_code == 1);
  CHECK_FALSE(fs::exists(dir.file("no/such/dir/x.model")));
  CHECK_FALSE(fs::exists(dir.file("no")));
}
