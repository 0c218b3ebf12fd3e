#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "propvec/eval_semantic.hpp"
#include "propvec/morph.hpp"
#include "propvec/util.hpp"

namespace propvec {

struct SlotSpec {
  std::string name;
  std::vector<std::string> values;
};

inline std::vector<SlotSpec> default_schema() {
  return {{"gender", {"M", "F"}},
          {"number", {"S", "P", "D"}},
          {"tense", {"PAST", "PRES", "FUT", "IMP", "INF"}}};
}

// A synthetic language: lemmas carry cluster membership (the semantic
// signal), the tag schema spans a full inflectional paradigm per lemma
// (the morphological signal), and lemma frequencies follow a Zipf law so
// rare words exist by construction.
struct LanguageSpec {
  uint32_t n_clusters = 8;
  uint32_t lemmas_per_cluster = 50;
  std::vector<SlotSpec> schema = default_schema();
  double zipf_s = 1.7;     // lemma frequency exponent within a cluster
  double tag_noise = 0.45; // chance a word ignores the sentence's dominant tag
  // Chance that an inflected form of a rare-half lemma adopts another rare
  // lemma's surface, making that surface morphologically ambiguous (two
  // analyses, possibly from different clusters). Ignored in fusional mode,
  // whose surfaces stay injective.
  double homonym_rate = 0.5;
  bool fusional = false;   // surfaces share no substring with their lemma
  uint64_t seed = 42;

  void validate() const {
    if (n_clusters < 2) throw std::invalid_argument("need >= 2 clusters");
    if (lemmas_per_cluster < 2)
      throw std::invalid_argument("need >= 2 lemmas per cluster");
    size_t tags = 1;
    for (const auto& s : schema) {
      if (s.values.empty()) throw std::invalid_argument("empty slot");
      tags *= s.values.size();
    }
    if (schema.empty() || tags < 2)
      throw std::invalid_argument("schema must span >= 2 tags");
    if (!(zipf_s >= 0)) throw std::invalid_argument("zipf exponent must be >= 0");
    if (!(tag_noise >= 0 && tag_noise < 1))
      throw std::invalid_argument("tag noise must be in [0,1)");
    if (!(homonym_rate >= 0 && homonym_rate <= 1))
      throw std::invalid_argument("homonym rate must be in [0,1]");
  }
};

struct Lexicon {
  std::vector<std::string> lemmas;      // lemma id = cluster * per + rank
  std::vector<uint32_t> cluster_of;     // per lemma id
  std::vector<MorphTag> tags;
  std::vector<std::string> tag_texts;
  std::vector<std::string> surfaces;    // [lemma * n_tags + tag]
  std::vector<uint32_t> donor_cell;     // homonym source, or UINT32_MAX
  std::vector<double> zipf_weight;      // per lemma id
  uint32_t n_clusters = 0;

  size_t n_lemmas() const { return lemmas.size(); }
  size_t n_tags() const { return tags.size(); }

  const std::string& surface(uint32_t lemma, uint32_t tag) const {
    return surfaces.at(size_t(lemma) * n_tags() + tag);
  }

  bool borrowed(uint32_t lemma, uint32_t tag) const {
    return donor_cell.at(size_t(lemma) * n_tags() + tag) != UINT32_MAX;
  }

  Token token(uint32_t lemma, uint32_t tag) const {
    return {surface(lemma, tag), lemmas.at(lemma), tags.at(tag)};
  }
};

namespace detail {

// Lemmas use letters a..m, inflection material letters n..z. The disjoint
// alphabets make concatenative surfaces decodable and keep fusional
// surfaces free of lemma substrings.
constexpr char kLemmaAlpha[] = "abcdefghijklm";
constexpr char kAffixAlpha[] = "nopqrstuvwxyz";

template <typename Gen>
std::string random_lemma(Gen& g) {
  size_t len = 3 + uniform_below(g, 4);
  std::string s(len, 'a');
  for (auto& c : s) c = kLemmaAlpha[uniform_below(g, 13)];
  return s;
}

inline std::string tag_suffix(size_t tag_index, size_t n_tags) {
  size_t width = 1;
  for (size_t span = 13; span < n_tags; span *= 13) ++width;
  std::string s(width, kAffixAlpha[0]);
  for (size_t i = width; i-- > 0;) {
    s[i] = kAffixAlpha[tag_index % 13];
    tag_index /= 13;
  }
  return s;
}

inline std::string fusional_surface(const std::string& lemma,
                                    const std::string& tag_text,
                                    uint64_t salt) {
  uint64_t h = mix64(fnv1a64(lemma.data(), lemma.size()) ^
                     fnv1a64(tag_text.data(), tag_text.size()) ^ salt);
  std::string s(6, 'n');
  for (auto& c : s) {
    c = kAffixAlpha[h % 13];
    h = mix64(h);
  }
  return s;
}

}  // namespace detail

inline Lexicon gen_language(const LanguageSpec& spec) {
  spec.validate();
  Lexicon lex;
  lex.n_clusters = spec.n_clusters;

  // Cartesian product of slot values, slot-0 major.
  size_t n_tags = 1;
  for (const auto& s : spec.schema) n_tags *= s.values.size();
  for (size_t i = 0; i < n_tags; ++i) {
    MorphTag tag;
    size_t rem = i;
    for (size_t j = spec.schema.size(); j-- > 0;) {
      const auto& vals = spec.schema[j].values;
      tag.slots.insert(tag.slots.begin(), vals[rem % vals.size()]);
      rem /= vals.size();
    }
    lex.tags.push_back(tag);
    lex.tag_texts.push_back(tag.text());
  }

  std::mt19937_64 gen(spec.seed);
  std::unordered_set<std::string> used_lemmas;
  std::unordered_set<std::string> used_surfaces;
  size_t total = size_t(spec.n_clusters) * spec.lemmas_per_cluster;
  for (size_t li = 0; li < total; ++li) {
    uint32_t cluster = uint32_t(li / spec.lemmas_per_cluster);
    uint32_t rank = uint32_t(li % spec.lemmas_per_cluster);
    std::vector<std::string> paradigm(n_tags);
    std::string lemma;
    bool committed = false;
    for (int attempt = 1; attempt <= 100; ++attempt) {
      lemma = detail::random_lemma(gen);
      if (used_lemmas.count(lemma)) continue;
      std::set<std::string> fresh;
      bool ok = true;
      for (size_t t = 0; t < n_tags && ok; ++t) {
        paradigm[t] = spec.fusional
                          ? detail::fusional_surface(lemma, lex.tag_texts[t],
                                                     uint64_t(attempt))
                          : lemma + detail::tag_suffix(t, n_tags);
        ok = !used_surfaces.count(paradigm[t]) && fresh.insert(paradigm[t]).second;
      }
      if (!ok) continue;
      used_lemmas.insert(lemma);
      for (auto& s : paradigm) used_surfaces.insert(s);
      committed = true;
      break;
    }
    if (!committed)
      throw std::runtime_error(
          "paradigm collision persisted after 100 attempts");
    lex.lemmas.push_back(lemma);
    lex.cluster_of.push_back(cluster);
    lex.zipf_weight.push_back(std::pow(double(rank + 1), -spec.zipf_s));
    for (auto& s : paradigm) lex.surfaces.push_back(std::move(s));
  }
  lex.donor_cell.assign(lex.surfaces.size(), UINT32_MAX);

  // Homonym pass: cells of rare-half lemmas may adopt another rare-half
  // lemma's surface. Per-lemma injectivity is preserved; a cell donates or
  // borrows, never both, so every shared surface has exactly one spelling
  // source.
  if (!spec.fusional && spec.homonym_rate > 0) {
    uint32_t half = spec.lemmas_per_cluster / 2;
    std::vector<uint32_t> tail_cells;
    for (uint32_t l = 0; l < total; ++l)
      if (l % spec.lemmas_per_cluster >= half)
        for (uint32_t t = 0; t < n_tags; ++t)
          tail_cells.push_back(uint32_t(l * n_tags + t));
    std::vector<char> is_donor(lex.surfaces.size(), 0);
    for (uint32_t cell : tail_cells) {
      if (canonical(gen) >= spec.homonym_rate) continue;
      if (is_donor[cell]) continue;
      uint32_t l = uint32_t(cell / n_tags);
      for (int attempt = 0; attempt < 100; ++attempt) {
        uint32_t donor = tail_cells[uniform_below(gen, tail_cells.size())];
        if (donor / n_tags == l) continue;
        if (lex.donor_cell[donor] != UINT32_MAX || is_donor[donor]) continue;
        const std::string& s = lex.surfaces[donor];
        bool clash = false;
        for (size_t t2 = 0; t2 < n_tags && !clash; ++t2)
          clash = l * n_tags + t2 != cell && lex.surfaces[l * n_tags + t2] == s;
        if (clash) continue;
        lex.surfaces[cell] = s;
        lex.donor_cell[cell] = donor;
        is_donor[donor] = 1;
        break;
      }
    }
  }
  return lex;
}

struct GeneratedCorpus {
  std::string text;              // the tagged corpus, one sentence per line
  std::vector<uint64_t> counts;  // surface occurrences, [lemma * n_tags + tag]
  uint64_t tokens = 0;
};

// Every sentence draws one cluster and one dominant tag; its words come
// from that cluster's lemmas (Zipf-weighted) and carry the dominant tag
// except for tag_noise-many deviations. Context therefore predicts both
// the cluster (semantics) and the tag (morphology).
inline GeneratedCorpus gen_corpus(const Lexicon& lex,
                                  const LanguageSpec& spec,
                                  uint64_t n_sentences, uint32_t sentence_len,
                                  uint64_t seed) {
  if (n_sentences < 1) throw std::invalid_argument("need >= 1 sentence");
  if (sentence_len < 1) throw std::invalid_argument("need sentence length >= 1");
  size_t n_tags = lex.n_tags();
  uint32_t per = uint32_t(lex.n_lemmas() / lex.n_clusters);

  // Per-cluster cumulative Zipf weights.
  std::vector<double> cdf(lex.n_lemmas());
  for (uint32_t c = 0; c < lex.n_clusters; ++c) {
    double acc = 0;
    for (uint32_t r = 0; r < per; ++r) {
      acc += lex.zipf_weight[size_t(c) * per + r];
      cdf[size_t(c) * per + r] = acc;
    }
  }

  std::mt19937_64 gen(seed);
  GeneratedCorpus out;
  out.counts.assign(lex.surfaces.size(), 0);
  out.text.reserve(size_t(n_sentences) * sentence_len * 16);
  for (uint64_t s = 0; s < n_sentences; ++s) {
    auto cluster = uint32_t(uniform_below(gen, lex.n_clusters));
    auto dominant = uint32_t(uniform_below(gen, n_tags));
    const double* ccdf = &cdf[size_t(cluster) * per];
    double cmax = ccdf[per - 1];
    for (uint32_t w = 0; w < sentence_len; ++w) {
      double u = canonical(gen) * cmax;
      uint32_t r = uint32_t(std::upper_bound(ccdf, ccdf + per, u) - ccdf);
      if (r >= per) r = per - 1;
      uint32_t lemma = cluster * per + r;
      uint32_t tag = dominant;
      if (spec.tag_noise > 0 && canonical(gen) < spec.tag_noise) {
        auto other = uint32_t(uniform_below(gen, n_tags - 1));
        tag = other >= dominant ? other + 1 : other;
      }
      if (w) out.text += ' ';
      out.text += lex.surface(lemma, tag);
      out.text += '|';
      out.text += lex.lemmas[lemma];
      out.text += '|';
      out.text += lex.tag_texts[tag];
      ++out.counts[size_t(lemma) * n_tags + tag];
      ++out.tokens;
    }
    out.text += '\n';
  }
  return out;
}

struct EvalSetParams {
  uint64_t common_min = 100;  // a surface this frequent counts as common
  uint64_t rare_lo = 10;      // rare targets: count in [rare_lo, rare_hi)
  uint64_t rare_hi = 100;
  uint64_t cand_min = 5;      // candidates come from the whole retained vocab
  uint32_t n_common_targets = 60;
  uint32_t n_rare_targets = 35;
  uint32_t triples_per_target = 5;
  uint32_t n_morph_common = 100;  // size of the frequent-word morph sample
};

struct EvalSets {
  std::vector<Triple> triples_common;
  std::vector<Triple> triples_rare;
  std::vector<std::string> targets_common;  // frequent-word morph protocol
  std::vector<std::string> targets_rare;    // = distinct rare triple targets
};

// Gold evaluation material: cand_high always shares the target's cluster
// (and never its lemma), cand_low never does; all weights are 1. Rare
// triples use only targets whose corpus count is below rare_hi. Candidates
// come from the whole vocabulary above cand_min, so rare targets get
// compared against easy and hard candidates alike.
inline EvalSets gen_eval_sets(const Lexicon& lex, const GeneratedCorpus& corpus,
                              const EvalSetParams& p, uint64_t seed) {
  size_t n_tags = lex.n_tags();
  using Surf = std::pair<uint32_t, uint32_t>;  // (lemma, tag)

  // Rarity is a property of the written form, so homonymous readings pool
  // their counts.
  std::unordered_map<std::string, uint64_t> surface_total;
  for (uint32_t l = 0; l < lex.n_lemmas(); ++l)
    for (uint32_t t = 0; t < n_tags; ++t)
      surface_total[lex.surface(l, t)] += corpus.counts[size_t(l) * n_tags + t];

  std::vector<Surf> common, rare, cands;
  std::vector<std::vector<Surf>> cands_by_cluster(lex.n_clusters);
  for (uint32_t l = 0; l < lex.n_lemmas(); ++l)
    for (uint32_t t = 0; t < n_tags; ++t) {
      uint64_t c = corpus.counts[size_t(l) * n_tags + t];
      if (c == 0) continue;  // reading never attested
      uint64_t total = surface_total[lex.surface(l, t)];
      if (c >= p.common_min) common.push_back({l, t});
      if (total >= p.rare_lo && total < p.rare_hi) rare.push_back({l, t});
      if (total >= p.cand_min) {
        cands.push_back({l, t});
        cands_by_cluster[lex.cluster_of[l]].push_back({l, t});
      }
    }
  if (common.empty())
    throw std::runtime_error(
        "no word reaches the common threshold: corpus too small for eval "
        "generation");
  for (uint32_t c = 0; c < lex.n_clusters; ++c) {
    std::unordered_set<uint32_t> lemmas;
    for (auto& s : cands_by_cluster[c]) lemmas.insert(s.first);
    if (lemmas.size() < 2)
      throw std::runtime_error("cluster " + std::to_string(c) +
                               " has fewer than 2 usable lemmas: corpus too "
                               "small for eval generation");
  }

  std::mt19937_64 gen(seed);
  // A homonymous surface appears once per reading in the pools; targets
  // are deduplicated by their written form.
  auto sample_from = [&](std::vector<Surf> pool, size_t n) {
    fisher_yates(pool, gen);
    std::vector<Surf> out;
    std::unordered_set<std::string> seen;
    for (auto cell : pool) {
      if (out.size() >= n) break;
      if (seen.insert(lex.surface(cell.first, cell.second)).second)
        out.push_back(cell);
    }
    return out;
  };

  auto make_triples = [&](const std::vector<Surf>& targets,
                          std::vector<Triple>& out) {
    for (auto [tl, tt] : targets) {
      Token target = lex.token(tl, tt);
      uint32_t cluster = lex.cluster_of[tl];
      for (uint32_t i = 0; i < p.triples_per_target; ++i) {
        Triple tr;
        tr.target = target;
        tr.weight = 1.0;
        const auto& pool = cands_by_cluster[cluster];
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
          auto [hl, ht] = pool[uniform_below(gen, pool.size())];
          if (hl == tl) continue;
          auto [ll, lt] = cands[uniform_below(gen, cands.size())];
          if (lex.cluster_of[ll] == cluster) continue;
          tr.cand_high = lex.token(hl, ht);
          tr.cand_low = lex.token(ll, lt);
          ok = tr.cand_high.surface != target.surface &&
               tr.cand_low.surface != target.surface &&
               tr.cand_high.surface != tr.cand_low.surface;
        }
        if (!ok)
          throw std::runtime_error("could not assemble a distinct triple");
        out.push_back(std::move(tr));
      }
    }
  };

  EvalSets out;
  auto common_targets = sample_from(common, p.n_common_targets);
  auto rare_targets = sample_from(rare, p.n_rare_targets);
  if (rare_targets.size() < p.n_rare_targets)
    throw std::runtime_error(
        "only " + std::to_string(rare_targets.size()) +
        " rare target words (need " + std::to_string(p.n_rare_targets) +
        "): increase the zipf exponent or the corpus size");
  make_triples(common_targets, out.triples_common);
  make_triples(rare_targets, out.triples_rare);
  for (auto [l, t] : sample_from(common, p.n_morph_common))
    out.targets_common.push_back(lex.surface(l, t));
  for (auto [l, t] : rare_targets)
    out.targets_rare.push_back(lex.surface(l, t));
  return out;
}

inline std::string triples_tsv(const std::vector<Triple>& triples) {
  std::string out;
  char buf[32];
  for (const auto& t : triples) {
    out += t.target.text();
    out += '\t';
    out += t.cand_high.text();
    out += '\t';
    out += t.cand_low.text();
    int n = std::snprintf(buf, sizeof buf, "\t%g\n", t.weight);
    out.append(buf, size_t(n));
  }
  return out;
}

inline std::string joined_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace propvec
