#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "propvec/corpus.hpp"
#include "propvec/morph.hpp"
#include "propvec/util.hpp"
#include "propvec/vectors.hpp"

namespace propvec {

namespace detail {

// AnalysesFn maps a surface to its recorded (lemma, tag) analyses, or
// nullptr when the word is unknown.
template <typename AnalysesFn>
const std::vector<Analysis>& analyses_or_throw(const std::string& word,
                                               AnalysesFn&& analyses) {
  const std::vector<Analysis>* a = analyses(word);
  if (!a || a->empty())
    throw std::runtime_error("no recorded analysis for '" + word + "'");
  return *a;
}

}  // namespace detail

// Total count of incompatible tag slots between a word and its neighbors:
// per neighbor, the minimum Hamming distance over all (word analysis,
// neighbor analysis) tag pairs; summed over the neighbor list. `selected`,
// when given, flags which of the word's analyses realize some minimum.
template <typename AnalysesFn>
uint64_t morpho_dist_with(const std::string& word, const NeighborList& nb,
                          AnalysesFn&& analyses,
                          std::vector<char>* selected = nullptr) {
  const auto& wtags = detail::analyses_or_throw(word, analyses);
  if (selected) selected->assign(wtags.size(), 0);
  uint64_t total = 0;
  for (const auto& n : nb.neighbors) {
    const auto& ntags = detail::analyses_or_throw(n.word, analyses);
    uint32_t best = UINT32_MAX;
    for (const auto& wa : wtags)
      for (const auto& na : ntags)
        best = std::min(best, hamming(wa.tag, na.tag));
    if (selected)
      for (size_t i = 0; i < wtags.size(); ++i)
        for (const auto& na : ntags)
          if (hamming(wtags[i].tag, na.tag) == best) (*selected)[i] = 1;
    total += best;
  }
  return total;
}

inline uint64_t morpho_dist(const std::string& word, const NeighborList& nb,
                            const Vocabulary& vocab) {
  return morpho_dist_with(word, nb, [&](const std::string& w) {
    auto id = vocab.word_id(w);
    return id ? &vocab.word(*id).analyses : nullptr;
  });
}

struct MorphoSimValue {
  double value = 0;    // in [0, 1]
  uint64_t dist = 0;   // raw incompatible-slot count
  uint32_t arity = 0;  // |m_w| used as normalizer
  bool clamped = false;
};

// MorphoSim over an already-computed neighbor list:
// 1 - dist / (k * |m_w|), where |m_w| is the slot count of the word
// analysis realizing the per-neighbor minima (the largest such analysis
// when neighbors select different ones). Clamped at 0 when neighbor tags
// are longer than |m_w|.
template <typename AnalysesFn>
MorphoSimValue morpho_sim_for_neighbors(const std::string& word,
                                        const NeighborList& nb, size_t k,
                                        AnalysesFn&& analyses) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (nb.neighbors.size() < k)
    throw std::runtime_error("only " + std::to_string(nb.neighbors.size()) +
                             " neighbors available for '" + word + "' (need " +
                             std::to_string(k) + ")");
  std::vector<char> selected;
  MorphoSimValue out;
  out.dist = morpho_dist_with(word, nb, analyses, &selected);
  const auto& wtags = detail::analyses_or_throw(word, analyses);
  for (size_t i = 0; i < wtags.size(); ++i)
    if (selected[i])
      out.arity = std::max(out.arity, uint32_t(wtags[i].tag.arity()));
  double raw = 1.0 - double(out.dist) / (double(k) * double(out.arity));
  out.clamped = raw < 0;
  out.value = std::clamp(raw, 0.0, 1.0);
  return out;
}

template <typename AnalysesFn>
MorphoSimValue morpho_sim_with(const std::string& word, const WordVectors& wv,
                               size_t k, AnalysesFn&& analyses) {
  return morpho_sim_for_neighbors(word, top_k(wv, word, k), k, analyses);
}

inline MorphoSimValue morpho_sim(const std::string& word,
                                 const WordVectors& wv, size_t k,
                                 const Vocabulary& vocab) {
  return morpho_sim_with(word, wv, k, [&](const std::string& w) {
    auto id = vocab.word_id(w);
    return id ? &vocab.word(*id).analyses : nullptr;
  });
}

// Word sample for the averaged protocol: either an explicit target list or
// a seeded random draw of n words with count >= min_count.
struct MorphSample {
  std::vector<std::string> targets;  // non-empty selects the explicit mode
  size_t n = 100;
  uint32_t min_count = 5;
  uint64_t seed = 1;
};

struct MorphoResult {
  std::vector<std::pair<std::string, double>> values;
  double mean = 0;
  size_t k = 0;
  uint64_t clamp_count = 0;
  std::string sample_desc;
};

inline MorphoResult morpho_sim_avg(const WordVectors& wv,
                                   const Vocabulary& vocab, size_t k,
                                   const MorphSample& sample) {
  std::vector<std::string> chosen;
  std::string desc;
  if (!sample.targets.empty()) {
    for (const auto& w : sample.targets)
      if (wv.find(w) && vocab.word_id(w)) chosen.push_back(w);
    desc = "explicit list (" + std::to_string(chosen.size()) + " of " +
           std::to_string(sample.targets.size()) + " known)";
  } else {
    std::vector<std::string> pool;
    for (uint32_t i = 0; i < vocab.size(); ++i) {
      const auto& e = vocab.word(i);
      if (e.count >= sample.min_count && wv.find(e.surface))
        pool.push_back(e.surface);
    }
    std::mt19937_64 gen(sample.seed);
    fisher_yates(pool, gen);
    if (pool.size() > sample.n) pool.resize(sample.n);
    chosen = std::move(pool);
    desc = "random sample n=" + std::to_string(chosen.size()) +
           " min_count=" + std::to_string(sample.min_count) +
           " seed=" + std::to_string(sample.seed);
  }
  if (chosen.empty())
    throw std::runtime_error("empty sample: no known target words");

  MorphoResult out;
  out.k = k;
  out.sample_desc = std::move(desc);
  double sum = 0;
  for (const auto& w : chosen) {
    auto v = morpho_sim(w, wv, k, vocab);
    out.values.emplace_back(w, v.value);
    if (v.clamped) ++out.clamp_count;
    sum += v.value;
  }
  out.mean = sum / double(out.values.size());
  return out;
}

}  // namespace propvec
