// propvec command-line tool: train property-composed word embeddings and
// run the semantic / morphological evaluation and query workflows.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "propvec/propvec.hpp"

namespace pv = propvec;

namespace {

struct TrainOpts {
  std::string input, props, output;
  pv::TrainConfig tc;
  std::string compose = "sum";
  uint32_t minn = 3, maxn = 6;
  uint64_t buckets = 2000000;
  bool quiet = false;
};

struct EvalSemOpts {
  std::string model, triples;
};

struct EvalMorphOpts {
  std::string model, targets, per_word;
  size_t k = 10;
  size_t sample_n = 100;
  uint32_t sample_min_count = 5;
  uint64_t seed = 1;
};

struct NnOpts {
  std::string model, word;
  size_t k = 10;
};

struct SynthOpts {
  std::string out_dir;
  pv::LanguageSpec spec;
  uint64_t sentences = 100000;
  uint32_t sentence_len = 12;
  pv::EvalSetParams eval;
};

pv::PropertyConfig make_property_config(const TrainOpts& o) {
  auto pc = pv::PropertyConfig::from_string(o.props);
  pc.minn = o.minn;
  pc.maxn = o.maxn;
  pc.buckets = o.buckets;
  if (o.compose == "mean")
    pc.composition = pv::Composition::Mean;
  else if (o.compose != "sum")
    throw CLI::ValidationError("--compose", "expected 'sum' or 'mean'");
  pc.validate();
  return pc;
}

int run_train(const TrainOpts& o) {
  pv::TrainConfig tc = o.tc;
  tc.progress = !o.quiet;
  auto pc = make_property_config(o);
  auto [model, stats] = pv::train_file(o.input, tc, pc);
  pv::save_model(model, o.output + ".model");
  uint64_t n = pv::export_word_vectors(model, o.output + ".vec");
  std::printf(
      "trained props=%s dim=%u window=%u words=%zu tokens=%llu pairs=%llu "
      "mean_loss=%.4f final_lr=%.6f time=%.1fs\n",
      pc.label().c_str(), stats.dim, stats.window, size_t(n),
      (unsigned long long)stats.tokens_processed,
      (unsigned long long)stats.pairs, stats.mean_loss, stats.final_lr,
      stats.wall_seconds);
  return 0;
}

int run_eval_sem(const EvalSemOpts& o) {
  auto model = pv::load_model(o.model);
  auto triples = pv::parse_triples_file(o.triples);
  auto s = pv::ag_score(model, triples);
  std::printf("score=%.3f covered=%llu skipped=%llu\n", s.score,
              (unsigned long long)s.covered, (unsigned long long)s.skipped);
  return 0;
}

std::vector<std::string> read_target_lines(const std::string& path) {
  std::vector<std::string> out;
  std::string text = pv::read_file(path);
  for (auto line : pv::split(text, '\n')) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.remove_suffix(1);
    if (!line.empty()) out.emplace_back(line);
  }
  return out;
}

int run_eval_morph(const EvalMorphOpts& o, bool have_targets) {
  auto model = pv::load_model(o.model);
  auto vectors = pv::word_vectors(model);
  pv::MorphSample sample;
  if (have_targets) {
    sample.targets = read_target_lines(o.targets);
    if (sample.targets.empty())
      throw std::runtime_error("no targets in " + o.targets);
  } else {
    sample.n = o.sample_n;
    sample.min_count = o.sample_min_count;
    sample.seed = o.seed;
  }
  auto res = pv::morpho_sim_avg(vectors, model.vocab, o.k, sample);
  std::printf("morphosim=%.3f k=%zu n=%zu\n", res.mean, res.k,
              res.values.size());
  if (res.clamp_count)
    std::fprintf(stderr, "propvec: %llu value(s) clamped to [0,1]\n",
                 (unsigned long long)res.clamp_count);
  if (!o.per_word.empty()) {
    std::string tsv;
    char buf[64];
    for (const auto& [word, value] : res.values) {
      int n = std::snprintf(buf, sizeof buf, "\t%.6f\n", value);
      tsv += word;
      tsv.append(buf, size_t(n));
    }
    pv::write_file_atomic(o.per_word, tsv);
  }
  return 0;
}

int run_nn(const NnOpts& o) {
  auto model = pv::load_model(o.model);
  auto vectors = pv::word_vectors(model);
  auto nb = pv::top_k(vectors, o.word, o.k);
  size_t rank = 0;
  for (const auto& n : nb.neighbors) {
    auto id = model.vocab.word_id(n.word);
    const auto& a = model.vocab.word(*id).analyses.at(0);
    std::printf("%zu\t%s\t%.6f\t%s\t%s\n", ++rank, n.word.c_str(), n.cosine,
                a.lemma.c_str(), a.tag.text().c_str());
  }
  return 0;
}

int run_synth(const SynthOpts& o) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  auto path = [&](const char* name) {
    return (fs::path(o.out_dir) / name).string();
  };
  auto lex = pv::gen_language(o.spec);
  auto corpus =
      pv::gen_corpus(lex, o.spec, o.sentences, o.sentence_len,
                     pv::mix64(o.spec.seed + 1));
  auto sets = pv::gen_eval_sets(lex, corpus, o.eval, pv::mix64(o.spec.seed + 2));
  pv::write_file_atomic(path("corpus.txt"), corpus.text);
  pv::write_file_atomic(path("triples_common.tsv"),
                        pv::triples_tsv(sets.triples_common));
  pv::write_file_atomic(path("triples_rare.tsv"),
                        pv::triples_tsv(sets.triples_rare));
  pv::write_file_atomic(path("targets_common.txt"),
                        pv::joined_lines(sets.targets_common));
  pv::write_file_atomic(path("targets_rare.txt"),
                        pv::joined_lines(sets.targets_rare));
  std::printf(
      "wrote dir=%s sentences=%llu tokens=%llu triples_common=%zu "
      "triples_rare=%zu targets_common=%zu targets_rare=%zu\n",
      o.out_dir.c_str(), (unsigned long long)o.sentences,
      (unsigned long long)corpus.tokens, sets.triples_common.size(),
      sets.triples_rare.size(), sets.targets_common.size(),
      sets.targets_rare.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"propvec: word embeddings composed from linguistic properties"};
  app.require_subcommand(1);

  TrainOpts train_o;
  EvalSemOpts sem_o;
  EvalMorphOpts morph_o;
  NnOpts nn_o;
  SynthOpts synth_o;
  std::function<int()> action;

  auto props_check = CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          pv::PropertyConfig::from_string(s);
        } catch (const std::exception& e) {
          return e.what();
        }
        return {};
      },
      "PROPS");

  // train
  auto* train = app.add_subcommand(
      "train", "Train a model on a tagged corpus (surface|lemma|tag tokens)");
  train->add_option("--input", train_o.input, "tagged corpus file")
      ->required()
      ->envname("PROPVEC_INPUT");
  train->add_option("--props", train_o.props,
                    "property subset (W, L, WL, WM, LM, WLM, ...) or 'ngrams'")
      ->required()
      ->check(props_check)
      ->envname("PROPVEC_PROPS");
  train->add_option("--output", train_o.output,
                    "output prefix; writes <prefix>.model and <prefix>.vec")
      ->required()
      ->envname("PROPVEC_OUTPUT");
  train->add_option("--dim", train_o.tc.dim, "embedding dimensionality")
      ->capture_default_str()
      ->envname("PROPVEC_DIM");
  train->add_option("--window", train_o.tc.window, "context window to each side")
      ->capture_default_str()
      ->envname("PROPVEC_WINDOW");
  train->add_option("--neg", train_o.tc.negatives, "negative samples per pair")
      ->capture_default_str()
      ->envname("PROPVEC_NEG");
  train->add_option("--epochs", train_o.tc.epochs, "training epochs")
      ->capture_default_str()
      ->envname("PROPVEC_EPOCHS");
  train->add_option("--lr", train_o.tc.lr_start, "starting learning rate")
      ->capture_default_str()
      ->envname("PROPVEC_LR");
  train->add_option("--min-count", train_o.tc.min_count,
                    "drop surfaces rarer than this")
      ->capture_default_str()
      ->envname("PROPVEC_MIN_COUNT");
  train->add_option("--t", train_o.tc.t,
                    "frequent-word subsampling threshold (1 disables)")
      ->capture_default_str()
      ->envname("PROPVEC_T");
  train->add_option("--alpha", train_o.tc.alpha, "negative-sampling exponent")
      ->capture_default_str()
      ->envname("PROPVEC_ALPHA");
  train->add_option("--threads", train_o.tc.workers, "hogwild worker threads")
      ->capture_default_str()
      ->envname("PROPVEC_THREADS");
  train->add_option("--seed", train_o.tc.seed,
                    "rng seed (deterministic with --threads 1)")
      ->capture_default_str()
      ->envname("PROPVEC_SEED");
  train->add_option("--compose", train_o.compose,
                    "property composition: sum or mean")
      ->capture_default_str()
      ->check(CLI::IsMember({"sum", "mean"}))
      ->envname("PROPVEC_COMPOSE");
  train->add_option("--minn", train_o.minn, "min n-gram length (ngrams mode)")
      ->capture_default_str()
      ->envname("PROPVEC_MINN");
  train->add_option("--maxn", train_o.maxn, "max n-gram length (ngrams mode)")
      ->capture_default_str()
      ->envname("PROPVEC_MAXN");
  train->add_option("--buckets", train_o.buckets,
                    "n-gram hash buckets (ngrams mode)")
      ->capture_default_str()
      ->envname("PROPVEC_BUCKETS");
  train->add_flag("--fixed-window", train_o.tc.fixed_window,
                  "always use the full window instead of sampling its size")
      ->envname("PROPVEC_FIXED_WINDOW");
  train->add_flag("--quiet", train_o.quiet, "suppress progress output")
      ->envname("PROPVEC_QUIET");
  train->callback([&] { action = [&] { return run_train(train_o); }; });

  // eval-sem
  auto* sem = app.add_subcommand(
      "eval-sem", "Score a model on confidence-weighted similarity triples");
  sem->add_option("--model", sem_o.model, "model file")
      ->required()
      ->envname("PROPVEC_MODEL");
  sem->add_option("--triples", sem_o.triples, "triples TSV file")
      ->required()
      ->envname("PROPVEC_TRIPLES");
  sem->callback([&] { action = [&] { return run_eval_sem(sem_o); }; });

  // eval-morph
  auto* morph = app.add_subcommand(
      "eval-morph",
      "Average MorphoSim of a model over sampled or listed target words");
  morph->add_option("--model", morph_o.model, "model file")
      ->required()
      ->envname("PROPVEC_MODEL");
  morph->add_option("--k", morph_o.k, "neighbors per target")
      ->capture_default_str()
      ->envname("PROPVEC_K");
  auto* sample_opt =
      morph->add_option("--sample", morph_o.sample_n,
                        "score this many randomly chosen words");
  sample_opt->capture_default_str()->envname("PROPVEC_SAMPLE");
  auto* targets_opt = morph->add_option(
      "--targets", morph_o.targets, "file with one target word per line");
  targets_opt->envname("PROPVEC_TARGETS");
  morph->add_option("--seed", morph_o.seed, "sampling seed")
      ->capture_default_str()
      ->envname("PROPVEC_SEED");
  morph->add_option("--sample-min-count", morph_o.sample_min_count,
                    "minimum corpus count for sampled words")
      ->capture_default_str()
      ->envname("PROPVEC_SAMPLE_MIN_COUNT");
  morph->add_option("--per-word", morph_o.per_word,
                    "also write per-word values to this TSV file")
      ->envname("PROPVEC_PER_WORD");
  morph->callback([&] {
    bool have_sample = sample_opt->count() > 0;
    bool have_targets = targets_opt->count() > 0;
    if (have_sample == have_targets)
      throw CLI::ValidationError(
          "eval-morph", "exactly one of --sample or --targets is required");
    action = [&, have_targets] { return run_eval_morph(morph_o, have_targets); };
  });

  // nn
  auto* nn = app.add_subcommand(
      "nn", "Top-k nearest neighbors of a word by cosine similarity");
  nn->add_option("--model", nn_o.model, "model file")
      ->required()
      ->envname("PROPVEC_MODEL");
  nn->add_option("--word", nn_o.word, "query surface form")
      ->required()
      ->envname("PROPVEC_WORD");
  nn->add_option("--k", nn_o.k, "number of neighbors")
      ->capture_default_str()
      ->envname("PROPVEC_K");
  nn->callback([&] { action = [&] { return run_nn(nn_o); }; });

  // synth
  auto* synth = app.add_subcommand(
      "synth",
      "Generate a synthetic tagged corpus with gold semantic/morph eval sets");
  synth->add_option("--out-dir", synth_o.out_dir, "output directory")
      ->required()
      ->envname("PROPVEC_OUT_DIR");
  synth->add_option("--clusters", synth_o.spec.n_clusters, "semantic clusters")
      ->capture_default_str()
      ->envname("PROPVEC_CLUSTERS");
  synth->add_option("--lemmas", synth_o.spec.lemmas_per_cluster,
                    "lemmas per cluster")
      ->capture_default_str()
      ->envname("PROPVEC_LEMMAS");
  synth->add_option("--sentences", synth_o.sentences, "sentences to generate")
      ->capture_default_str()
      ->envname("PROPVEC_SENTENCES");
  synth->add_option("--sentence-len", synth_o.sentence_len, "tokens per sentence")
      ->capture_default_str()
      ->envname("PROPVEC_SENTENCE_LEN");
  synth->add_option("--zipf", synth_o.spec.zipf_s,
                    "lemma frequency Zipf exponent")
      ->capture_default_str()
      ->envname("PROPVEC_ZIPF");
  synth->add_option("--tag-noise", synth_o.spec.tag_noise,
                    "chance a token deviates from the sentence tag")
      ->capture_default_str()
      ->envname("PROPVEC_TAG_NOISE");
  synth->add_option("--homonyms", synth_o.spec.homonym_rate,
                    "chance a rare inflected form spells like another word")
      ->capture_default_str()
      ->envname("PROPVEC_HOMONYMS");
  synth->add_flag("--fusional", synth_o.spec.fusional,
                  "surfaces share no substring with their lemma")
      ->envname("PROPVEC_FUSIONAL");
  synth->add_option("--seed", synth_o.spec.seed, "generation seed")
      ->capture_default_str()
      ->envname("PROPVEC_SEED");
  synth->add_option("--common-targets", synth_o.eval.n_common_targets,
                    "targets in the common triples set")
      ->capture_default_str()
      ->envname("PROPVEC_COMMON_TARGETS");
  synth->add_option("--rare-targets", synth_o.eval.n_rare_targets,
                    "targets in the rare triples set")
      ->capture_default_str()
      ->envname("PROPVEC_RARE_TARGETS");
  synth->add_option("--triples-per-target", synth_o.eval.triples_per_target,
                    "triples generated per target")
      ->capture_default_str()
      ->envname("PROPVEC_TRIPLES_PER_TARGET");
  synth->add_option("--morph-targets", synth_o.eval.n_morph_common,
                    "size of the frequent-word morph target list")
      ->capture_default_str()
      ->envname("PROPVEC_MORPH_TARGETS");
  synth->add_option("--common-min", synth_o.eval.common_min,
                    "corpus count at which a word counts as common")
      ->capture_default_str()
      ->envname("PROPVEC_COMMON_MIN");
  synth->add_option("--rare-min", synth_o.eval.rare_lo,
                    "minimum corpus count for rare targets")
      ->capture_default_str()
      ->envname("PROPVEC_RARE_MIN");
  synth->callback([&] { action = [&] { return run_synth(synth_o); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "propvec: error: %s\n", e.what());
    return 1;
  }
}
