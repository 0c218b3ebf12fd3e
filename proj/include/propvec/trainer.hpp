#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "propvec/corpus.hpp"
#include "propvec/model.hpp"
#include "propvec/sgns.hpp"

namespace propvec {

struct TrainConfig {
  uint32_t window = 2;
  uint32_t negatives = 5;
  uint32_t epochs = 5;
  double lr_start = 0.05;
  uint32_t min_count = 5;
  double t = 1e-4;       // subsampling threshold; t=1 disables in practice
  double alpha = 0.75;   // negative-sampling exponent
  uint32_t dim = 200;
  uint64_t seed = 1;
  uint32_t workers = 1;
  bool fixed_window = false;
  bool progress = true;

  void validate() const {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(lr_start > 0)) throw std::invalid_argument("lr must be > 0");
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    if (!(t > 0)) throw std::invalid_argument("t must be > 0");
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be > 0");
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  }
};

struct TrainStats {
  uint64_t tokens_processed = 0;
  uint64_t pairs = 0;
  double wall_seconds = 0;
  double final_lr = 0;
  double mean_loss = 0;
  std::vector<double> interval_mean_loss;
  uint32_t window = 0;  // echoed settings
  uint32_t dim = 0;
};

// Linear decay from lr_start to 0 over the whole run, floored at
// 1e-6 * lr_start so tail updates never die completely.
inline double learning_rate(double lr_start, uint64_t done, uint64_t total) {
  double f = total ? double(done) / double(total) : 1.0;
  if (f > 1) f = 1;
  return std::max(lr_start * 1e-6, lr_start * (1.0 - f));
}

// (focus, context) index pairs for one sentence. Subsampling runs first:
// positions rejected by `keep` take no part, and the window applies over
// the surviving positions (so pairing can bridge removed tokens). Each
// surviving focus draws its radius b uniformly from [1, window] unless
// fixed_window is set.
template <typename Gen, typename KeepFn>
void contexts_into(size_t n_tokens, uint32_t window, bool fixed_window,
                   Gen& gen, KeepFn&& keep, std::vector<uint32_t>& kept_buf,
                   std::vector<std::pair<uint32_t, uint32_t>>& pairs_out) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  kept_buf.clear();
  pairs_out.clear();
  for (size_t i = 0; i < n_tokens; ++i)
    if (keep(i)) kept_buf.push_back(uint32_t(i));
  for (size_t j = 0; j < kept_buf.size(); ++j) {
    uint32_t b =
        fixed_window ? window : uint32_t(1 + uniform_below(gen, window));
    size_t lo = j > b ? j - b : 0;
    size_t hi = std::min(j + size_t(b), kept_buf.size() - 1);
    for (size_t m = lo; m <= hi; ++m)
      if (m != j) pairs_out.emplace_back(kept_buf[j], kept_buf[m]);
  }
}

template <typename Gen, typename KeepFn>
std::vector<std::pair<uint32_t, uint32_t>> contexts(size_t n_tokens,
                                                    uint32_t window,
                                                    bool fixed_window, Gen& gen,
                                                    KeepFn&& keep) {
  std::vector<uint32_t> kept;
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  contexts_into(n_tokens, window, fixed_window, gen, keep, kept, pairs);
  return pairs;
}

namespace detail {

// Corpus pre-encoded for the hot loop: each token carries its word id and
// an interned "token type" resolving to the focus-side property ids.
struct EncodedCorpus {
  std::vector<size_t> offsets;  // sentence i spans tokens [offsets[i], offsets[i+1])
  std::vector<uint32_t> word_ids;
  std::vector<uint32_t> type_ids;
  std::vector<std::vector<uint32_t>> type_props;
  uint64_t tokens() const { return word_ids.size(); }
};

inline EncodedCorpus encode_corpus(const std::vector<Sentence>& corpus,
                                   const Vocabulary& vocab,
                                   const PropertyConfig& config) {
  EncodedCorpus enc;
  std::unordered_map<std::string, uint32_t> interned;
  enc.offsets.push_back(0);
  for (const auto& sent : corpus) {
    for (const auto& tok : sent) {
      auto wid = vocab.word_id(tok.surface);
      if (!wid) continue;  // below min_count: dropped before windowing
      std::string key = tok.text();
      auto [it, fresh] = interned.emplace(key, uint32_t(enc.type_props.size()));
      if (fresh) enc.type_props.push_back(extract_properties(tok, config, vocab));
      enc.word_ids.push_back(*wid);
      enc.type_ids.push_back(it->second);
    }
    enc.offsets.push_back(enc.word_ids.size());
  }
  return enc;
}

struct alignas(64) WorkerTally {
  std::atomic<uint64_t> pairs{0};
  std::atomic<double> loss{0};

  void add(uint64_t p, double l) {
    pairs.store(pairs.load(std::memory_order_relaxed) + p,
                std::memory_order_relaxed);
    loss.store(loss.load(std::memory_order_relaxed) + l,
               std::memory_order_relaxed);
  }
};

}  // namespace detail

// Multi-epoch skip-gram negative-sampling training. Sentences are split
// into blocks; every epoch the block order is reshuffled with a per-epoch
// seed and blocks are dealt round-robin to workers. Workers share the model
// matrices hogwild-style (unsynchronized writes, lost updates tolerated);
// only the token counter driving the lr decay is atomic. Training is
// bit-reproducible when workers == 1.
inline std::pair<Model, TrainStats> train(const std::vector<Sentence>& corpus,
                                          const TrainConfig& tc,
                                          const PropertyConfig& pc) {
  tc.validate();
  pc.validate();
  Vocabulary vocab = build_vocab(corpus, tc.min_count);
  if (vocab.size() == 0)
    throw std::runtime_error("empty vocabulary after min_count filtering");
  SamplingDist noise = negative_dist(vocab, tc.alpha);
  Model model = init_model(std::move(vocab), pc, tc.dim, tc.seed);
  detail::EncodedCorpus enc =
      detail::encode_corpus(corpus, model.vocab, model.config);
  if (enc.tokens() == 0)
    throw std::runtime_error("no trainable tokens after vocabulary filtering");

  std::vector<double> keep_prob(model.vocab.size());
  for (uint32_t i = 0; i < model.vocab.size(); ++i)
    keep_prob[i] = keep_probability(model.vocab.word(i).count,
                                    model.vocab.total_tokens(), tc.t);

  size_t n_sentences = enc.offsets.size() - 1;
  size_t n_blocks = std::min<size_t>(std::max<size_t>(size_t(tc.workers) * 8, 1),
                                     n_sentences);
  uint64_t total_tokens = enc.tokens() * uint64_t(tc.epochs);

  std::atomic<uint64_t> token_counter{0};
  std::vector<detail::WorkerTally> tallies(tc.workers);
  std::vector<std::exception_ptr> errors(tc.workers);

  auto worker_fn = [&](uint32_t w) {
    std::mt19937_64 gen(mix64(tc.seed ^ (0x57e11ull * (w + 1))));
    sgns::TrainScratch<float> scratch;
    std::vector<uint32_t> kept;
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    std::vector<uint32_t> negs;
    negs.reserve(tc.negatives);
    auto input = model.input_view();
    auto output = model.output_view();

    for (uint32_t epoch = 0; epoch < tc.epochs; ++epoch) {
      // Same permutation in every worker: derived from (seed, epoch) only.
      std::vector<uint32_t> order(n_blocks);
      for (uint32_t i = 0; i < n_blocks; ++i) order[i] = i;
      std::mt19937_64 egen(mix64(tc.seed) ^ mix64(0xb10c + epoch));
      fisher_yates(order, egen);

      for (size_t oi = w; oi < n_blocks; oi += tc.workers) {
        uint32_t block = order[oi];
        size_t s_begin = block * n_sentences / n_blocks;
        size_t s_end = (block + 1) * n_sentences / n_blocks;
        for (size_t s = s_begin; s < s_end; ++s) {
          size_t base = enc.offsets[s];
          size_t len = enc.offsets[s + 1] - base;
          if (len == 0) continue;
          uint64_t done = token_counter.fetch_add(
                              len, std::memory_order_relaxed) +
                          len;
          float lr = float(learning_rate(tc.lr_start, done, total_tokens));

          contexts_into(len, tc.window, tc.fixed_window, gen,
                        [&](size_t i) {
                          double kp = keep_prob[enc.word_ids[base + i]];
                          return kp >= 1.0 || canonical(gen) < kp;
                        },
                        kept, pairs);

          double loss_sum = 0;
          for (auto [fi, ci] : pairs) {
            uint32_t ctx = enc.word_ids[base + ci];
            negs.clear();
            for (uint32_t n = 0; n < tc.negatives; ++n) {
              // Redraw when the noise draw hits the true context; after
              // 100 tries give up on this slot.
              for (int attempt = 0; attempt < 100; ++attempt) {
                uint32_t cand = noise.sample(gen);
                if (cand != ctx) {
                  negs.push_back(cand);
                  break;
                }
              }
            }
            const auto& props = enc.type_props[enc.type_ids[base + fi]];
            loss_sum += sgns::train_pair(
                input, output, std::span<const uint32_t>(props), ctx,
                std::span<const uint32_t>(negs), lr, model.config.composition,
                scratch);
          }
          tallies[w].add(pairs.size(), loss_sum);
        }
      }
    }
  };

  auto t_start = std::chrono::steady_clock::now();
  TrainStats stats;
  stats.window = tc.window;
  stats.dim = tc.dim;

  std::atomic<bool> running{true};
  std::thread reporter;
  if (tc.progress) {
    reporter = std::thread([&] {
      uint64_t last_tokens = 0, last_pairs = 0;
      double last_loss = 0;
      auto last = std::chrono::steady_clock::now();
      while (running.load(std::memory_order_relaxed)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
        auto now = std::chrono::steady_clock::now();
        if (now - last < std::chrono::seconds(1)) continue;
        uint64_t tok = token_counter.load(std::memory_order_relaxed);
        uint64_t prs = 0;
        double loss = 0;
        for (auto& t : tallies) {
          prs += t.pairs.load(std::memory_order_relaxed);
          loss += t.loss.load(std::memory_order_relaxed);
        }
        double secs = std::chrono::duration<double>(now - last).count();
        double rate = double(tok - last_tokens) / secs;
        double interval_loss =
            prs > last_pairs ? (loss - last_loss) / double(prs - last_pairs)
                             : 0.0;
        stats.interval_mean_loss.push_back(interval_loss);
        std::fprintf(stderr,
                     "propvec: %5.1f%%  %.0fk tok/s  loss=%.4f  lr=%.5f\n",
                     100.0 * double(tok) / double(total_tokens), rate / 1000.0,
                     interval_loss,
                     learning_rate(tc.lr_start, tok, total_tokens));
        last = now;
        last_tokens = tok;
        last_pairs = prs;
        last_loss = loss;
      }
    });
  }

  if (tc.workers == 1) {
    try {
      worker_fn(0);
    } catch (...) {
      errors[0] = std::current_exception();
    }
  } else {
    std::vector<std::thread> threads;
    threads.reserve(tc.workers);
    for (uint32_t w = 0; w < tc.workers; ++w)
      threads.emplace_back([&, w] {
        try {
          worker_fn(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : threads) th.join();
  }
  running.store(false);
  if (reporter.joinable()) reporter.join();

  for (uint32_t w = 0; w < tc.workers; ++w) {
    if (!errors[w]) continue;
    try {
      std::rethrow_exception(errors[w]);
    } catch (const std::exception& e) {
      throw std::runtime_error("worker " + std::to_string(w) +
                               " failed: " + e.what());
    }
  }

  stats.tokens_processed = token_counter.load();
  for (auto& t : tallies) {
    stats.pairs += t.pairs.load();
    stats.mean_loss += t.loss.load();
  }
  stats.mean_loss = stats.pairs ? stats.mean_loss / double(stats.pairs) : 0.0;
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  stats.final_lr = learning_rate(tc.lr_start, stats.tokens_processed,
                                 total_tokens);
  return {std::move(model), std::move(stats)};
}

inline std::pair<Model, TrainStats> train_file(const std::string& corpus_path,
                                               const TrainConfig& tc,
                                               const PropertyConfig& pc) {
  return train(read_corpus_file(corpus_path), tc, pc);
}

}  // namespace propvec
